use nalgebra::DMatrix;

use super::{CasidaError, CoupledBlocks, CoupledSystem};
use crate::types::Vec3;

/// `λ_α(x_q)·d_q` for every transition q and mode α, n×M in system order.
pub(crate) fn coupling_products(system: &CoupledSystem) -> DMatrix<f64> {
    let (n, m) = (system.n(), system.m());
    DMatrix::from_fn(n, m, |q, a| {
        let t = &system.transitions[q];
        let lambda: Vec3 = system.modes[a].coupling_at(&t.position);
        lambda.dot(&t.dipole)
    })
}

fn validate(system: &CoupledSystem) -> Result<(), CasidaError> {
    let n = system.n();
    if n == 0 {
        return Err(CasidaError::NoTransitions);
    }
    if let Some(k) = &system.k_elec {
        if k.nrows() != n || k.ncols() != n {
            return Err(CasidaError::KernelShape {
                rows: k.nrows(),
                cols: k.ncols(),
                n,
            });
        }
        if k.iter().any(|x| !x.is_finite()) {
            return Err(CasidaError::KernelNotFinite);
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (k[(i, j)], k[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                    return Err(CasidaError::KernelNotSymmetric { i, j });
                }
            }
        }
    }
    Ok(())
}

/// Full pRPA kernel `K = K^elec + [self-energy]`, n×n.
pub fn kernel_matrix(system: &CoupledSystem) -> Result<DMatrix<f64>, CasidaError> {
    validate(system)?;
    let n = system.n();
    let mut k = match &system.k_elec {
        Some(k) => (k + k.transpose()) * 0.5,
        None => DMatrix::zeros(n, n),
    };
    if system.include_self_energy {
        let g = coupling_products(system);
        k += &g * g.transpose();
    }
    Ok(k)
}

pub fn assemble_blocks(system: &CoupledSystem) -> Result<CoupledBlocks, CasidaError> {
    let k = kernel_matrix(system)?;
    let n = system.n();
    let sqrt_w: Vec<f64> = system.transitions.iter().map(|t| t.omega.sqrt()).collect();
    let mut u = DMatrix::from_fn(n, n, |i, j| 2.0 * sqrt_w[i] * sqrt_w[j] * k[(i, j)]);
    for (i, t) in system.transitions.iter().enumerate() {
        u[(i, i)] += t.omega * t.omega;
    }

    let mut order: Vec<usize> = (0..system.m()).collect();
    order.sort_by(|&a, &b| system.modes[a].omega.total_cmp(&system.modes[b].omega));
    let g = coupling_products(system);
    let v = DMatrix::from_fn(n, order.len(), |q, k| {
        let a = order[k];
        std::f64::consts::SQRT_2 * sqrt_w[q] * system.modes[a].omega * g[(q, a)]
    });
    let mode_omega: Vec<f64> = order.iter().map(|&a| system.modes[a].omega).collect();
    let d = mode_omega.iter().map(|w| w * w).collect();
    Ok(CoupledBlocks {
        u,
        v,
        d,
        mode_omega,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{PhotonMode, Transition};
    use nalgebra::Vector3;

    fn single(lambda: f64, omega0: f64, omegac: f64) -> CoupledSystem {
        CoupledSystem::new(
            vec![Transition::new(0, omega0, Vector3::new(1.0, 0.0, 0.0), Vector3::zeros()).unwrap()],
            vec![PhotonMode::new(0, omegac, Vector3::new(lambda / omegac, 0.0, 0.0)).unwrap()],
        )
    }

    #[test]
    fn rabi_mapping() {
        let b = assemble_blocks(&single(0.1, 1.3, 0.9)).unwrap();
        assert!((b.u[(0, 0)] - 1.69).abs() < 1e-15);
        assert!((b.v[(0, 0)] - 2.0 * 0.1 * (1.3f64 / 2.0).sqrt()).abs() < 1e-15);
        assert!((b.d[0] - 0.81).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling() {
        let b = assemble_blocks(&single(0.0, 1.3, 0.9)).unwrap();
        assert_eq!(b.u[(0, 0)], 1.3 * 1.3);
        assert_eq!(b.v[(0, 0)], 0.0);
    }

    #[test]
    fn self_energy_shifts_u() {
        let s = single(0.1, 1.3, 0.9).with_self_energy(true);
        let b = assemble_blocks(&s).unwrap();
        let ld = 0.1 / 0.9;
        assert!((b.u[(0, 0)] - (1.69 + 2.0 * 1.3 * ld * ld)).abs() < 1e-14);
    }

    #[test]
    fn sorts_poles_and_keeps_permutation() {
        let t = vec![Transition::new(1, 1.0, Vector3::new(0.5, 0.0, 0.0), Vector3::zeros()).unwrap()];
        let modes = vec![
            PhotonMode::new(10, 3.0, Vector3::new(0.1, 0.0, 0.0)).unwrap(),
            PhotonMode::new(11, 1.0, Vector3::new(0.2, 0.0, 0.0)).unwrap(),
            PhotonMode::new(12, 2.0, Vector3::new(-0.3, 0.0, 0.0)).unwrap(),
        ];
        let b = assemble_blocks(&CoupledSystem::new(t, modes)).unwrap();
        assert_eq!(b.order, vec![1, 2, 0]);
        assert_eq!(b.d, vec![1.0, 4.0, 9.0]);
        assert!(b.v[(0, 1)] < 0.0);
        assert_eq!(b.unsort(&[1.0, 2.0, 3.0]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn kernel_shape_errors() {
        let s = single(0.1, 1.0, 1.0).with_k_elec(DMatrix::zeros(2, 2));
        assert!(matches!(assemble_blocks(&s), Err(CasidaError::KernelShape { .. })));
        let t = vec![
            Transition::new(0, 1.0, Vector3::zeros(), Vector3::zeros()).unwrap(),
            Transition::new(1, 1.0, Vector3::zeros(), Vector3::zeros()).unwrap(),
        ];
        let k = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let s = CoupledSystem::new(t, vec![]).with_k_elec(k);
        assert!(matches!(assemble_blocks(&s), Err(CasidaError::KernelNotSymmetric { .. })));
        assert_eq!(
            assemble_blocks(&CoupledSystem::new(vec![], vec![])).unwrap_err(),
            CasidaError::NoTransitions
        );
    }
}
