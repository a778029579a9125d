//! State construction and conversions between kets, density matrices and
//! vectorized density matrices.
//!
//! A state specification is a comma separated list of `Name[m]` tokens.
//! `Name` is a spin member (with its magnetic number), an electronic level
//! (`GS` or `GS[0]`), a ghost-spin multiplet (`C_1[0]`) or a state created by
//! [`crate::SpinSystem::add_basis`] (used on its own).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::constants::{HBAR, KB};
use crate::error::{Error, Result};
use crate::layout::parse_m;
use crate::qmatrix::{eig_hermitian, expm, Kind, QMatrix, C64};
use crate::system::SpinSystem;

struct Token<'a> {
    name: &'a str,
    m: Option<&'a str>,
}

fn tokens(spec: &str) -> Result<Vec<Token<'_>>> {
    let mut out = Vec::new();
    for raw in spec.split(',') {
        let tok = raw.trim();
        if tok.is_empty() {
            return Err(Error::Parse(format!("empty token in `{spec}`")));
        }
        let t = match tok.find('[') {
            Some(open) => {
                if !tok.ends_with(']') {
                    return Err(Error::Parse(format!("unbalanced bracket in `{tok}`")));
                }
                Token { name: tok[..open].trim(), m: Some(&tok[open + 1..tok.len() - 1]) }
            }
            None => Token { name: tok, m: None },
        };
        if t.name.is_empty() {
            return Err(Error::Parse(format!("missing name in `{tok}`")));
        }
        out.push(t);
    }
    Ok(out)
}

/// A resolved state specification: one sector and kets on member groups.
pub(crate) struct Resolved {
    pub sector: usize,
    pub groups: Vec<(Vec<usize>, Vec<C64>)>,
}

fn unit(n: usize, k: usize) -> Vec<C64> {
    (0..n).map(|i| if i == k { C64::one() } else { C64::zero() }).collect()
}

/// Resolves a specification to group kets; `Ok(None)` for a bare named
/// basis state, which is returned through `named`.
fn resolve_groups(sys: &SpinSystem, spec: &str) -> Result<(Vec<(Vec<usize>, Vec<C64>)>, Option<Vec<C64>>)> {
    let toks = tokens(spec)?;
    let layout = sys.layout();
    let mut groups = Vec::new();
    for t in &toks {
        if let Ok(idx) = layout.index_of(t.name) {
            let m = &layout.members()[idx];
            let n = m.multiplicity();
            let k = match t.m {
                None if n == 1 => 0,
                None => return Err(Error::InvalidState(format!("spin `{}` needs a magnetic number", t.name))),
                Some(text) => {
                    let tm = parse_m(text)?;
                    let ts = m.twice_spin() as i32;
                    if tm.abs() > ts || (ts - tm) % 2 != 0 {
                        return Err(Error::InvalidState(format!("m = {text} is not valid for `{}`", t.name)));
                    }
                    ((ts - tm) / 2) as usize
                }
            };
            groups.push((vec![idx], unit(n, k)));
        } else if let Some((ghost, mult)) = sys.multiplet(t.name) {
            let text = t.m.ok_or_else(|| Error::InvalidState(format!("`{}` needs a magnetic number", t.name)))?;
            let v = mult
                .state(parse_m(text)?)
                .ok_or_else(|| Error::InvalidState(format!("m = {text} is not valid for `{}`", t.name)))?;
            groups.push((ghost.members.clone(), v.clone()));
        } else if let Some(v) = sys.named_state(t.name) {
            if toks.len() != 1 || t.m.is_some() {
                return Err(Error::InvalidState(format!("basis state `{}` must be used on its own", t.name)));
            }
            return Ok((Vec::new(), Some(v.clone())));
        } else {
            return Err(Error::Unknown(t.name.to_string()));
        }
    }
    Ok((groups, None))
}

pub(crate) fn resolve(sys: &SpinSystem, spec: &str) -> Result<Resolved> {
    let (groups, named) = resolve_groups(sys, spec)?;
    if named.is_some() {
        return Err(Error::InvalidState(format!("`{spec}` is not a product state")));
    }
    let all: Vec<usize> = groups.iter().flat_map(|g| g.0.iter().copied()).collect();
    for (k, m) in all.iter().enumerate() {
        if all[..k].contains(m) {
            return Err(Error::InvalidState(format!("member `{}` specified twice", sys.members()[*m].name)));
        }
    }
    let secs = sys.layout().sectors_with(&all);
    match secs.len() {
        0 => Err(Error::InvalidState(format!("`{spec}` combines members of different branches"))),
        1 => Ok(Resolved { sector: secs[0], groups }),
        _ => Err(Error::InvalidState(format!("`{spec}` does not select a unique branch"))),
    }
}

/// Normalized ket for a full specification.
pub fn state(sys: &SpinSystem, spec: &str) -> Result<QMatrix> {
    let (_, named) = resolve_groups(sys, spec)?;
    if let Some(v) = named {
        return QMatrix::ket(&v);
    }
    let r = resolve(sys, spec)?;
    let v = sys.layout().sector_vector(r.sector, &r.groups)?;
    QMatrix::ket(&v)
}

/// Density matrix for a possibly partial specification; unmentioned spins
/// of the selected branch are maximally mixed.
pub fn state_dm(sys: &SpinSystem, spec: &str) -> Result<QMatrix> {
    let (_, named) = resolve_groups(sys, spec)?;
    if let Some(v) = named {
        return Ok(ket2dm(&QMatrix::ket(&v)?));
    }
    let r = resolve(sys, spec)?;
    let layout = sys.layout();
    let sec = &layout.sectors()[r.sector];
    let assigned: Vec<usize> = r.groups.iter().flat_map(|g| g.0.iter().copied()).collect();
    let free: Vec<usize> = sec
        .members()
        .iter()
        .copied()
        .filter(|m| !assigned.contains(m) && layout.members()[*m].multiplicity() > 1)
        .collect();
    let dims: Vec<usize> = free.iter().map(|&m| layout.members()[m].multiplicity()).collect();
    let total: usize = dims.iter().product();
    let n = sys.dim();
    let mut rho = vec![C64::zero(); n * n];
    for combo in 0..total {
        let mut groups = r.groups.clone();
        let mut rem = combo;
        for f in (0..free.len()).rev() {
            groups.push((vec![free[f]], unit(dims[f], rem % dims[f])));
            rem /= dims[f];
        }
        let v = layout.sector_vector(r.sector, &groups)?;
        let nz: Vec<(usize, C64)> = v.iter().copied().enumerate().filter(|(_, a)| !a.is_zero()).collect();
        for &(i, a) in &nz {
            for &(j, b) in &nz {
                rho[i * n + j] += a * b.conj() / total as f64;
            }
        }
    }
    QMatrix::from_vec(n, n, rho)
}

fn require_ket(psi: &QMatrix) -> Result<()> {
    if psi.cols() != 1 {
        return Err(Error::dim(format!("expected a column vector, got {:?}", psi.shape())));
    }
    Ok(())
}

pub fn ket2dm(psi: &QMatrix) -> QMatrix {
    assert_eq!(psi.cols(), 1, "ket2dm expects a column vector");
    (psi * &psi.adjoint()).with_kind(Kind::Operator)
}

/// Dominant eigenvector of a pure density matrix, phase fixed so its first
/// nonzero entry is real and positive.
pub fn dm2ket(rho: &QMatrix) -> Result<QMatrix> {
    let e = eig_hermitian(rho)?;
    let n = rho.rows();
    let top = e.values[n - 1];
    if top < 1.0 - 1e-10 {
        return Err(Error::Rank(top));
    }
    let mut v = e.vector(n - 1);
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let ph = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= ph;
        }
    }
    QMatrix::ket(&v)
}

/// Column-stacking vectorization: `vec[j·n + i] = ρ[i, j]`.
pub fn dm2vec(rho: &QMatrix) -> Result<QMatrix> {
    if !rho.is_square() {
        return Err(Error::dim("dm2vec expects a square matrix"));
    }
    let n = rho.rows();
    let mut v = vec![C64::zero(); n * n];
    for (i, j, x) in rho.triplets() {
        v[j * n + i] = x;
    }
    Ok(QMatrix::from_vec(n * n, 1, v)?.with_kind(Kind::Ket))
}

pub fn vec2dm(v: &QMatrix) -> Result<QMatrix> {
    require_ket(v)?;
    let len = v.rows();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::dim(format!("length {len} is not a perfect square")));
    }
    let data = v.to_vec();
    QMatrix::from_vec(n, n, (0..len).map(|k| data[(k % n) * n + k / n]).collect())
}

/// `diag((1+p)/2, (1-p)/2)`.
pub fn pol_spin(p: f64) -> Result<QMatrix> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("polarization {p} outside [-1, 1]")));
    }
    Ok(QMatrix::diag_real(&[(1.0 + p) / 2.0, (1.0 - p) / 2.0]))
}

/// `exp(-ħH/kT)/Z` for `H` in rad/s.
pub fn thermal_state(h: &QMatrix, temperature: f64) -> Result<QMatrix> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be positive, got {temperature}")));
    }
    let e = eig_hermitian(h)?;
    let beta = HBAR / (KB * temperature);
    let e0 = e.values[0];
    let w: Vec<f64> = e.values.iter().map(|&x| (-(x - e0) * beta).exp()).collect();
    let z: f64 = w.iter().sum();
    let d = QMatrix::diag_real(&w.iter().map(|x| x / z).collect::<Vec<_>>());
    Ok(&(&e.vectors * &d) * &e.vectors.adjoint())
}

/// `<ψ|op|ψ>` for kets, `tr(op ρ)` for density matrices and vectorized
/// density matrices (detected by shape).
pub fn expect(op: &QMatrix, state: &QMatrix) -> Result<C64> {
    let n = op.rows();
    if !op.is_square() {
        return Err(Error::dim("expect needs a square operator"));
    }
    if state.is_square() && state.rows() == n {
        return Ok(trace_product(op, state));
    }
    if state.cols() == 1 && state.rows() == n {
        let v = state.to_vec();
        let ov = op.apply_vec(&v);
        return Ok(v.iter().zip(&ov).map(|(a, b)| a.conj() * b).sum());
    }
    if state.cols() == 1 && state.rows() == n * n {
        return Ok(trace_product(op, &vec2dm(state)?));
    }
    Err(Error::dim(format!("state of shape {:?} does not match operator dimension {n}", state.shape())))
}

// tr(A B) without forming the product.
pub(crate) fn trace_product(a: &QMatrix, b: &QMatrix) -> C64 {
    let mut acc = C64::zero();
    for (i, j, x) in a.triplets() {
        acc += x * b.get(j, i);
    }
    acc
}

/// Applies `U = exp(-iθG)`: `Uψ` for kets, `UρU†` for density matrices.
pub fn rot(generator: &QMatrix, angle: f64, state: &QMatrix) -> Result<QMatrix> {
    let dev = generator.hermiticity_deviation();
    if dev > crate::qmatrix::Tolerances::DEFAULT.hermitian {
        return Err(Error::NotHermitian(dev));
    }
    let u = expm(&generator.scale(C64::new(0.0, -angle)));
    if state.rows() != u.rows() {
        return Err(Error::dim("state does not match generator dimension"));
    }
    if state.cols() == 1 {
        u.try_matmul(state)
    } else {
        (&u * state).try_matmul(&u.adjoint())
    }
}

/// Checks Hermiticity, unit trace and positivity of `rho`.
pub fn check_density_matrix(rho: &QMatrix, tol: f64) -> Result<()> {
    let dev = rho.hermiticity_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let tr = rho.trace();
    if (tr - C64::one()).norm() > tol {
        return Err(Error::Physicality(format!("trace {tr} differs from 1")));
    }
    let e = eig_hermitian(&rho.to_dense())?;
    if e.values[0] < -tol.max(1e-10) {
        return Err(Error::Physicality(format!("negative eigenvalue {}", e.values[0])));
    }
    Ok(())
}

/// Human-readable label of a basis index (for diagnostics).
pub fn describe_index(sys: &SpinSystem, index: usize) -> String {
    for sec in sys.layout().sectors() {
        if let Some(local) = sec.indices().iter().position(|&i| i == index) {
            let mut rem = local;
            let mut labels = vec![String::new(); sec.members().len()];
            for f in (0..sec.members().len()).rev() {
                let d = sec.dims()[f];
                let m = &sys.members()[sec.members()[f]];
                let k = rem % d;
                rem /= d;
                labels[f] = if m.is_spin() {
                    format!("{}[{}]", m.name, crate::layout::format_m(m.twice_spin() as i32 - 2 * k as i32))
                } else {
                    m.name.clone()
                };
            }
            return labels.join(",");
        }
    }
    String::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Decl, Member};

    fn pair() -> SpinSystem {
        SpinSystem::new(&Decl::tensor([
            Member::spin("S", 0.5).unwrap().into(),
            Member::spin("I", 0.5).unwrap().into(),
        ]))
        .unwrap()
    }

    #[test]
    fn product_states() {
        let sys = pair();
        assert!(state(&sys, "S[0.5],I[-0.5]").unwrap().approx_eq(&QMatrix::basis_ket(4, 1), 0.0));
        assert!(state(&sys, "S[-0.5], I[-0.5]").unwrap().approx_eq(&QMatrix::basis_ket(4, 3), 0.0));
        assert!(matches!(state(&sys, "S[0.5]"), Err(Error::InvalidState(_))));
        assert!(matches!(state(&sys, "X[0.5]"), Err(Error::Unknown(_))));
        let rho = state_dm(&sys, "S[0.5]").unwrap();
        assert!(rho.approx_eq(&QMatrix::diag_real(&[0.5, 0.5, 0.0, 0.0]), 1e-15));
        assert_eq!(describe_index(&sys, 2), "S[-0.5],I[0.5]");
    }

    #[test]
    fn levels_select_branches() {
        let sys = SpinSystem::new(&Decl::sum([
            Decl::tensor([Decl::sum([Member::level("GS").unwrap().into(), Member::level("ES").unwrap().into()]), Member::spin("S", 1.0).unwrap().into()]),
            Member::level("SS").unwrap().into(),
        ]))
        .unwrap();
        assert!(state(&sys, "ES,S[0]").unwrap().approx_eq(&QMatrix::basis_ket(7, 4), 0.0));
        assert!(state(&sys, "SS[0]").unwrap().approx_eq(&QMatrix::basis_ket(7, 6), 0.0));
        assert!(state(&sys, "S[0]").is_err());
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let sx = QMatrix::from_real(2, 2, &[0.0, 0.5, 0.5, 0.0]).unwrap();
        let v = dm2vec(&sx).unwrap();
        assert_eq!(v.to_vec(), [0.0, 0.5, 0.5, 0.0].map(|x| C64::new(x, 0.0)));
        let a = QMatrix::from_fn(3, 3, |i, j| C64::new((i * 3 + j) as f64, i as f64 - j as f64));
        assert_eq!(vec2dm(&dm2vec(&a).unwrap()).unwrap(), a);
        assert_eq!(dm2vec(&a).unwrap().get(1, 0), a.get(1, 0));
        assert_eq!(dm2vec(&a).unwrap().get(3, 0), a.get(0, 1));
        assert!(vec2dm(&QMatrix::basis_ket(3, 0)).is_err());
    }

    #[test]
    fn dm2ket_phase_and_rank() {
        let psi = QMatrix::ket(&[C64::new(0.0, 0.6), C64::new(0.8, 0.0)]).unwrap();
        let back = dm2ket(&ket2dm(&psi)).unwrap();
        assert!(back.approx_eq(&QMatrix::ket(&[C64::new(0.6, 0.0), C64::new(0.0, -0.8)]).unwrap(), 1e-12));
        assert!(matches!(dm2ket(&QMatrix::identity(2).scale_real(0.5)), Err(Error::Rank(_))));
    }

    #[test]
    fn rotations() {
        let sys = SpinSystem::new(&Decl::Member(Member::spin("S", 0.5).unwrap())).unwrap();
        let sx = sys.op("S.x").unwrap();
        let up = QMatrix::basis_ket(2, 0);
        let flipped = rot(sx, core::f64::consts::PI, &up).unwrap();
        assert!(flipped.approx_eq(&QMatrix::basis_ket(2, 1).scale(C64::new(0.0, -1.0)), 1e-14));
        let r = rot(sys.op("S.y").unwrap(), core::f64::consts::FRAC_PI_2, &pol_spin(1.0).unwrap()).unwrap();
        assert!((expect(sx, &r).unwrap().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn boltzmann_ratio() {
        let w = 2.0 * core::f64::consts::PI * 1e12;
        let rho = thermal_state(&QMatrix::diag_real(&[0.0, w]), 10.0).unwrap();
        let ratio = rho.get(0, 0).re / rho.get(1, 1).re;
        assert!((ratio / (HBAR * w / (KB * 10.0)).exp() - 1.0).abs() < 1e-12);
        assert!(thermal_state(&QMatrix::identity(2), 0.0).is_err());
    }
}
