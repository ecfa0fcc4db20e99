mod common;

use common::*;
use nalgebra::{Rotation3, Vector3};
use qedr_core::cavity::{add_strong_modes, gen_modes_1d, pole_aligned_grid, CavitySpec1D};
use qedr_core::rabi::{prpa_frequencies, prpa_system, RabiParams};
use qedr_core::spectra::{cell_edges, field_spectrum, strengths, trk_reference, trk_sum};
use qedr_core::types::linspace;
use qedr_core::units::{angstrom_to_bohr, ev_to_au};
use qedr_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn rotating_everything_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
    for _ in 0..10 {
        let sys = random_system(&mut rng, 3, 30);
        let mut turned = sys.clone();
        for t in turned.transitions.iter_mut() {
            t.dipole = rot * t.dipole;
        }
        for m in turned.modes.iter_mut() {
            m.coupling = rot * m.coupling;
        }
        let a = solve_dense(&assemble_blocks(&sys).unwrap()).unwrap();
        let b = solve_dense(&assemble_blocks(&turned).unwrap()).unwrap();
        let fa = strengths(&a, &sys).unwrap();
        let fb = strengths(&b, &turned).unwrap();
        for i in 0..fa.len() {
            assert!(rel(fa.omega[i], fb.omega[i]) < 1e-12);
            assert!((fa.f_nn[i] - fb.f_nn[i]).abs() < 1e-11);
        }
    }
}

#[test]
fn sum_rule_holds_with_electronic_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=5 {
        let sys = random_system(&mut rng, n, 40).with_self_energy(true);
        let sol = solve_dense(&assemble_blocks(&sys).unwrap()).unwrap();
        let total = trk_sum(&strengths(&sol, &sys).unwrap()).unwrap();
        assert!(rel(total, trk_reference(&sys)) < 1e-10);
    }
}

#[test]
fn zero_strength_extra_mode_is_inert() {
    let t = transition(0, 1.0, [0.8, 0.0, 0.0]);
    let modes = vec![mode(0, 0.9, [0.02, 0.0, 0.0]), mode(1, 1.2, [0.01, 0.0, 0.0])];
    let base = CoupledSystem::new(vec![t.clone()], modes.clone()).with_self_energy(true);
    let more = add_strong_modes(modes, Vector3::new(0.05, 0.0, 0.0), &[(1.0, 0.0)]).unwrap();
    let extended = CoupledSystem::new(vec![t], more).with_self_energy(true);
    let a = strengths(&solve_dense(&assemble_blocks(&base).unwrap()).unwrap(), &base).unwrap();
    let b = strengths(&solve_dense(&assemble_blocks(&extended).unwrap()).unwrap(), &extended).unwrap();
    let bright: Vec<(f64, f64)> = b
        .omega
        .iter()
        .zip(&b.f_nn)
        .filter(|(_, f)| **f > 1e-14)
        .map(|(&o, &f)| (o, f))
        .collect();
    assert_eq!(bright.len(), a.len());
    for ((o, f), (oa, fa)) in bright.iter().zip(a.omega.iter().zip(&a.f_nn)) {
        assert!(rel(*o, *oa) < 1e-12 && rel(*f, *fa) < 1e-10);
    }
}

#[test]
fn pole_grid_cells_hold_one_root_each() {
    let lx = CavitySpec1D::lx_for_coupled_spacing(ev_to_au(0.01));
    let spec = CavitySpec1D {
        lx,
        ly: angstrom_to_bohr(10.58),
        lz: angstrom_to_bohr(2.65),
        x0: 0.5 * lx,
        count: u64::MAX,
        window: Some((ev_to_au(6.0), ev_to_au(7.8))),
    };
    let modes = gen_modes_1d(&spec).unwrap();
    let sys = CoupledSystem::new(vec![transition(0, ev_to_au(6.88), [1.8, 0.0, 0.0])], modes).with_self_energy(true);
    let sol = solve_dense(&assemble_blocks(&sys).unwrap()).unwrap();
    let grid = pole_aligned_grid(&sys.modes, None).unwrap();
    let edges = cell_edges(&grid);
    // Only roots between the outermost coupled poles are bracketed by cells.
    let inner = (grid[0], *grid.last().unwrap());
    let bright: Vec<f64> = sol
        .excitations
        .iter()
        .filter(|x| x.evec_e[0].abs() > 1e-12 && x.omega > inner.0 && x.omega < inner.1)
        .map(|x| x.omega)
        .collect();
    let mut counts = vec![0; grid.len()];
    for w in bright {
        counts[edges.partition_point(|&e| e <= w) - 1] += 1;
    }
    assert!(counts[1..counts.len() - 1].iter().all(|&c| c == 1), "{counts:?}");
}

#[test]
fn rabi_field_spectrum_peaks_at_the_polaritons() {
    let p = RabiParams::new(1.0, 1.0, 0.1);
    let sys = prpa_system(&p).unwrap();
    let sol = solve_dense(&assemble_blocks(&sys).unwrap()).unwrap();
    let grid = linspace(0.8, 1.2, 4001);
    let s = field_spectrum(&sol.excitations, &sys, None, &grid, 1e-3, 3.0).unwrap();
    let peaks: Vec<f64> = (1..grid.len() - 1)
        .filter(|&i| s.values[i] > s.values[i - 1] && s.values[i] > s.values[i + 1])
        .map(|i| grid[i])
        .collect();
    let exact = prpa_frequencies(&p).unwrap();
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0] - exact.lower).abs() < 2e-4);
    assert!((peaks[1] - exact.upper).abs() < 2e-4);
}
