//! Spin Hamiltonians in angular-frequency units (rad/s).
//!
//! Every interaction is an instance of the bilinear form `S · A · X`, where
//! `X` is either a second spin or a static field.

use alloc::format;


use crate::constants::{HBAR, MU0};
use crate::error::{Error, Result};
use crate::qmatrix::{QMatrix, C64};
use crate::system::SpinSystem;

pub use crate::constants::{f2w, w2f};

/// Second operand of a bilinear interaction.
#[derive(Clone, Copy, Debug)]
pub enum Partner<'a> {
    Spin(&'a str),
    /// Static field in tesla.
    Field([f64; 3]),
}

/// Relative position of two spins.
#[derive(Clone, Copy, Debug)]
pub enum Position {
    /// `(r, θ, φ)` in meters and radians, θ measured from z.
    Spherical(f64, f64, f64),
    /// Cartesian vector in meters.
    Cartesian([f64; 3]),
}

impl Position {
    pub fn cartesian(&self) -> [f64; 3] {
        match *self {
            Position::Spherical(r, t, p) => spher2cart(r, t, p),
            Position::Cartesian(v) => v,
        }
    }
}

/// Which part of the dipolar tensor to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DipolarApprox {
    Full,
    /// Heteronuclear secular form, `SzIz` only.
    Secular,
    /// Homonuclear secular form, `SzIz - (S+I- + S-I+)/4`.
    SecularHomonuclear,
}

/// `(r sinθ cosφ, r sinθ sinφ, r cosθ)`.
pub fn spher2cart(r: f64, theta: f64, phi: f64) -> [f64; 3] {
    [r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]
}

fn components<'a>(sys: &'a SpinSystem, spin: &str) -> Result<[&'a QMatrix; 3]> {
    let m = sys.member(spin)?;
    if !m.is_spin() {
        return Err(Error::domain(format!("`{spin}` is not a spin")));
    }
    Ok([sys.op(&format!("{spin}.x"))?, sys.op(&format!("{spin}.y"))?, sys.op(&format!("{spin}.z"))?])
}

/// `Σ_ab S_a A_ab X_b`, embedded in the full space.
pub fn interaction_hamiltonian<T>(sys: &SpinSystem, spin: &str, a: &[[T; 3]; 3], partner: Partner<'_>) -> Result<QMatrix>
where
    T: Copy + Into<C64>,
{
    let s = components(sys, spin)?;
    let mut h = QMatrix::zeros(sys.dim(), sys.dim());
    match partner {
        Partner::Field(b) => {
            for (i, si) in s.iter().enumerate() {
                let coeff: C64 = (0..3).map(|j| a[i][j].into() * b[j]).sum();
                if coeff != C64::new(0.0, 0.0) {
                    h = h.try_axpy(coeff, si)?;
                }
            }
        }
        Partner::Spin(other) => {
            let x = components(sys, other)?;
            for (i, si) in s.iter().enumerate() {
                for (j, xj) in x.iter().enumerate() {
                    let coeff: C64 = a[i][j].into();
                    if coeff != C64::new(0.0, 0.0) {
                        h = h.try_axpy(coeff, &(*si * *xj))?;
                    }
                }
            }
        }
    }
    Ok(h.compact())
}

/// `γ (Bx Sx + By Sy + Bz Sz)`.
pub fn zeeman_interaction(sys: &SpinSystem, spin: &str, gamma: f64, b: [f64; 3]) -> Result<QMatrix> {
    let g = [[gamma, 0.0, 0.0], [0.0, gamma, 0.0], [0.0, 0.0, gamma]];
    interaction_hamiltonian(sys, spin, &g, Partner::Field(b))
}

/// `μ0 γ1 γ2 ħ / (4π r³)` in rad/s.
pub fn dipolar_constant(gamma1: f64, gamma2: f64, r: f64) -> f64 {
    MU0 * gamma1 * gamma2 * HBAR / (4.0 * core::f64::consts::PI * r * r * r)
}

/// Dipolar coupling `-(μ0 γ1 γ2 ħ / 4π r⁵)[3(S·r)(I·r) - r² S·I]` or one of
/// its secular truncations.
pub fn dipolar_coupling(
    sys: &SpinSystem,
    spin1: &str,
    spin2: &str,
    gamma1: f64,
    gamma2: f64,
    position: Position,
    approx: DipolarApprox,
) -> Result<QMatrix> {
    let v = position.cartesian();
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("dipolar distance must be positive and finite, got {r}")));
    }
    let k = dipolar_constant(gamma1, gamma2, r);
    let u = [v[0] / r, v[1] / r, v[2] / r];
    let geo = 3.0 * u[2] * u[2] - 1.0;
    let s = components(sys, spin1)?;
    let i = components(sys, spin2)?;
    match approx {
        DipolarApprox::Full => {
            let mut a = [[0.0; 3]; 3];
            for (p, row) in a.iter_mut().enumerate() {
                for (q, x) in row.iter_mut().enumerate() {
                    *x = -k * (3.0 * u[p] * u[q] - if p == q { 1.0 } else { 0.0 });
                }
            }
            interaction_hamiltonian(sys, spin1, &a, Partner::Spin(spin2))
        }
        DipolarApprox::Secular => Ok((s[2] * i[2]).scale_real(-k * geo).compact()),
        DipolarApprox::SecularHomonuclear => {
            let flip = &(s[0] * i[0]) + &(s[1] * i[1]);
            let zz = s[2] * i[2];
            Ok((&zz - &flip.scale_real(0.5)).scale_real(-k * geo).compact())
        }
    }
}

/// `D (Sz² - S(S+1)/3) + E (Sx² - Sy²)` for spins `S >= 1`.
pub fn zfs_interaction(sys: &SpinSystem, spin: &str, d: f64, e: f64) -> Result<QMatrix> {
    let m = sys.member(spin)?;
    if m.twice_spin() < 2 {
        return Err(Error::domain(format!("`{spin}` has spin {}; zero-field splitting needs S >= 1", m.val())));
    }
    let [sx, sy, sz] = components(sys, spin)?;
    let s = m.val();
    let id = sys.op(&format!("{spin}.id"))?;
    let axial = &(sz * sz) - &id.scale_real(s * (s + 1.0) / 3.0);
    let rhombic = &(sx * sx) - &(sy * sy);
    Ok((&axial.scale_real(d) + &rhombic.scale_real(e)).compact())
}

/// Quadrupole interaction; same form as [`zfs_interaction`] with the
/// quadrupolar prefactors folded into `d` and `e` by the caller.
pub fn quad_interaction(sys: &SpinSystem, spin: &str, d: f64, e: f64) -> Result<QMatrix> {
    zfs_interaction(sys, spin, d, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{GAMMA_13C, GAMMA_1H};
    use crate::layout::{Decl, Member};
    use crate::qmatrix::eig_hermitian;

    fn pair() -> SpinSystem {
        SpinSystem::new(&Decl::tensor([
            Member::spin("S", 0.5).unwrap().into(),
            Member::spin("I", 0.5).unwrap().into(),
        ]))
        .unwrap()
    }

    #[test]
    fn zeeman_along_z() {
        let s = pair();
        let h = zeeman_interaction(&s, "I", GAMMA_13C, [0.0, 0.0, 0.1]).unwrap();
        assert!(h.approx_eq(&s.op("I.z").unwrap().scale_real(GAMMA_13C * 0.1), 1e-6));
        let hx = zeeman_interaction(&s, "S", 2.0, [3.0, 0.0, 0.0]).unwrap();
        let e = eig_hermitian(&hx).unwrap();
        assert!((e.values[0] + 3.0).abs() < 1e-12 && (e.values[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn secular_dipolar_prefactor() {
        let s = pair();
        let r = 3e-10;
        let k = dipolar_constant(GAMMA_1H, GAMMA_1H, r);
        let h = dipolar_coupling(&s, "S", "I", GAMMA_1H, GAMMA_1H, Position::Spherical(r, 0.0, 0.0), DipolarApprox::Secular)
            .unwrap();
        let zz = s.op("S.z").unwrap() * s.op("I.z").unwrap();
        assert!(h.approx_eq(&zz.scale_real(-2.0 * k), 1e-9 * k));
        let magic = (1.0f64 / 3.0).sqrt().acos();
        let h0 = dipolar_coupling(&s, "S", "I", GAMMA_1H, GAMMA_1H, Position::Spherical(r, magic, 0.0), DipolarApprox::Secular)
            .unwrap();
        assert!(h0.max_abs() < 1e-12 * k);
        assert!(dipolar_coupling(&s, "S", "I", 1.0, 1.0, Position::Cartesian([0.0; 3]), DipolarApprox::Full).is_err());
    }

    #[test]
    fn zfs_spectrum() {
        let s = SpinSystem::new(&Decl::Member(Member::spin("S", 1.0).unwrap())).unwrap();
        let e = eig_hermitian(&zfs_interaction(&s, "S", 3.0, 0.0).unwrap()).unwrap();
        assert!((e.values[0] + 2.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
        let e = eig_hermitian(&zfs_interaction(&s, "S", 0.0, 0.25).unwrap()).unwrap();
        assert!((e.values[2] - e.values[0] - 0.5).abs() < 1e-12);
        assert!(zfs_interaction(&pair(), "S", 1.0, 0.0).is_err());
    }

    #[test]
    fn spherical_conversion() {
        let v = spher2cart(2.0, core::f64::consts::FRAC_PI_2, core::f64::consts::FRAC_PI_2);
        assert!(v[0].abs() < 1e-15 && (v[1] - 2.0).abs() < 1e-15 && v[2].abs() < 1e-15);
        assert_eq!(f2w(1.0), 2.0 * core::f64::consts::PI);
        assert_eq!(w2f(f2w(9.67e9)), 9.67e9);
    }
}
