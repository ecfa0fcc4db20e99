#![allow(dead_code)]

use nalgebra::{DMatrix, Vector3};
use qedr_core::{CoupledSystem, Excitation, PhotonMode, Transition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn transition(id: i64, omega: f64, d: [f64; 3]) -> Transition {
    Transition::new(id, omega, Vector3::from(d), Vector3::zeros()).unwrap()
}

pub fn mode(id: i64, omega: f64, l: [f64; 3]) -> PhotonMode {
    PhotonMode::new(id, omega, Vector3::from(l)).unwrap()
}

fn vec3(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 3] {
    [
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    ]
}

/// A random positive-definite coupled problem with a few awkward features:
/// uncoupled modes, duplicated frequencies and a transition resonant with a mode.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CoupledSystem {
    let transitions: Vec<Transition> = (0..n)
        .map(|q| transition(q as i64, rng.gen_range(0.5..1.5), vec3(rng, 1.0)))
        .collect();
    let mut modes = Vec::with_capacity(m);
    for a in 0..m {
        let roll: f64 = rng.gen();
        let omega = if roll < 0.1 && a > 0 {
            modes.last().map(|p: &PhotonMode| p.omega).unwrap()
        } else if roll < 0.15 {
            transitions[0].omega
        } else {
            rng.gen_range(0.2..2.0)
        };
        let coupling = if rng.gen::<f64>() < 0.2 { [0.0; 3] } else { vec3(rng, 0.05) };
        modes.push(mode(a as i64, omega, coupling));
    }
    let mut sys = CoupledSystem::new(transitions, modes);
    if n > 1 && rng.gen::<bool>() {
        let mut k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.02..0.02));
        k = (&k + k.transpose()) * 0.5;
        sys = sys.with_k_elec(k);
    }
    sys.with_self_energy(rng.gen::<bool>())
}

pub fn full_vector(x: &Excitation) -> Vec<f64> {
    x.evec_e.iter().chain(&x.evec_p).copied().collect()
}

pub fn overlap(a: &Excitation, b: &Excitation) -> f64 {
    full_vector(a)
        .iter()
        .zip(full_vector(b))
        .map(|(x, y)| x * y)
        .sum::<f64>()
        .abs()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Indices of excitations separated from their neighbours by more than `gap` (relative).
pub fn isolated(list: &[Excitation], gap: f64) -> Vec<usize> {
    (0..list.len())
        .filter(|&i| {
            let w = list[i].omega;
            let left = i == 0 || rel(list[i - 1].omega, w) > gap;
            let right = i + 1 == list.len() || rel(list[i + 1].omega, w) > gap;
            left && right
        })
        .collect()
}
