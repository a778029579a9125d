//! Incoherent transitions and spin relaxation as Lindblad operators.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::CollapseOperator;
use crate::error::{Error, Result};
use crate::qmatrix::{QMatrix, C64};
use crate::states::resolve;
use crate::system::SpinSystem;

/// Ordered list of `"source -> target"` (or `"target <- source"`) keys with
/// rates in s⁻¹. Inserting an existing key replaces its rate in place.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateTable {
    entries: Vec<(String, f64)>,
}

impl RateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, rate: f64) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = rate,
            None => self.entries.push((key.to_string(), rate)),
        }
    }

    pub fn with(mut self, key: &str, rate: f64) -> Self {
        self.insert(key, rate);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == key).map(|e| e.1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, r)| (k.as_str(), *r))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<'a> FromIterator<(&'a str, f64)> for RateTable {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        let mut t = RateTable::new();
        for (k, r) in iter {
            t.insert(k, r);
        }
        t
    }
}

/// A parsed transition key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub target: String,
}

impl Transition {
    pub fn parse(key: &str) -> Result<Self> {
        let fwd = key.matches("->").count();
        let back = key.matches("<-").count();
        let (source, target) = match (fwd, back) {
            (1, 0) => {
                let (a, b) = key.split_once("->").unwrap();
                (a, b)
            }
            (0, 1) => {
                let (a, b) = key.split_once("<-").unwrap();
                (b, a)
            }
            _ => return Err(Error::Parse(format!("transition `{key}` needs exactly one arrow"))),
        };
        let (source, target) = (source.trim(), target.trim());
        if source.is_empty() || target.is_empty() {
            return Err(Error::Parse(format!("transition `{key}` has an empty endpoint")));
        }
        Ok(Transition { source: source.to_string(), target: target.to_string() })
    }
}

struct Endpoint {
    sector: usize,
    groups: Vec<(Vec<usize>, Vec<C64>)>,
    /// Members of the sector left unspecified, multiplicity above one.
    free: Vec<usize>,
}

fn endpoint(sys: &SpinSystem, spec: &str) -> Result<Endpoint> {
    let r = resolve(sys, spec)?;
    let fixed: Vec<usize> = r.groups.iter().flat_map(|g| g.0.iter().copied()).collect();
    let sec = &sys.layout().sectors()[r.sector];
    let free = sec
        .members()
        .iter()
        .copied()
        .filter(|m| !fixed.contains(m) && sys.members()[*m].multiplicity() > 1)
        .collect();
    Ok(Endpoint { sector: r.sector, groups: r.groups, free })
}

fn unit(n: usize, k: usize) -> Vec<C64> {
    (0..n).map(|i| if i == k { C64::one() } else { C64::zero() }).collect()
}

/// All basis assignments of `members`, each a list of unit groups.
fn assignments(sys: &SpinSystem, members: &[usize]) -> Vec<Vec<(Vec<usize>, Vec<C64>)>> {
    let mut out: Vec<Vec<(Vec<usize>, Vec<C64>)>> = vec![Vec::new()];
    for &m in members {
        let n = sys.members()[m].multiplicity();
        let mut next = Vec::with_capacity(out.len() * n);
        for a in &out {
            for k in 0..n {
                let mut b = a.clone();
                b.push((vec![m], unit(n, k)));
                next.push(b);
            }
        }
        out = next;
    }
    out
}

fn sparse_entries(v: &[C64]) -> Vec<(usize, C64)> {
    v.iter().enumerate().filter(|(_, z)| !z.is_zero()).map(|(i, z)| (i, *z)).collect()
}

/// Jump operators for every entry of `rates`.
///
/// Members of the selected branches that an endpoint leaves unspecified are
/// carried along: a member free on both sides keeps its state, a member free
/// only at the source gives one operator per source state at the full rate,
/// and a member free only at the target is populated uniformly (one operator
/// per target state at `rate / d`). Zero rates produce no operators.
pub fn transition_operators(sys: &SpinSystem, rates: &RateTable) -> Result<Vec<CollapseOperator>> {
    let mut out = Vec::new();
    let n = sys.dim();
    for (key, rate) in rates.iter() {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::domain(format!("rate for `{key}` must be finite and non-negative, got {rate}")));
        }
        if rate == 0.0 {
            continue;
        }
        let t = Transition::parse(key)?;
        let src = endpoint(sys, &t.source)?;
        let dst = endpoint(sys, &t.target)?;
        let shared: Vec<usize> = src.free.iter().copied().filter(|m| dst.free.contains(m)).collect();
        let src_only: Vec<usize> = src.free.iter().copied().filter(|m| !shared.contains(m)).collect();
        let dst_only: Vec<usize> = dst.free.iter().copied().filter(|m| !shared.contains(m)).collect();
        let dst_dim: usize = dst_only.iter().map(|&m| sys.members()[m].multiplicity()).product();
        let amp = (rate / dst_dim as f64).sqrt();
        let shared_states = assignments(sys, &shared);
        for a in assignments(sys, &src_only) {
            for b in assignments(sys, &dst_only) {
                let mut trip = Vec::new();
                for c in &shared_states {
                    let mut sg = src.groups.clone();
                    sg.extend(a.iter().cloned());
                    sg.extend(c.iter().cloned());
                    let mut tg = dst.groups.clone();
                    tg.extend(b.iter().cloned());
                    tg.extend(c.iter().cloned());
                    let sv = sparse_entries(&sys.layout().sector_vector(src.sector, &sg)?);
                    let tv = sparse_entries(&sys.layout().sector_vector(dst.sector, &tg)?);
                    for &(i, x) in &tv {
                        for &(j, y) in &sv {
                            trip.push((i, j, x * y.conj() * amp));
                        }
                    }
                }
                out.push(CollapseOperator::from_scaled(QMatrix::from_triplets(n, n, trip)?.compact()));
            }
        }
    }
    Ok(out)
}

/// Longitudinal and transverse relaxation of every spin member with `t1` or
/// `t2` set: `√(1/2T1) S±` and `√(1/2T2') 2Sz` with
/// `1/T2' = 1/T2 - 1/(2T1)`.
pub fn relaxation_operators(sys: &SpinSystem) -> Result<Vec<CollapseOperator>> {
    let mut out = Vec::new();
    for m in sys.members() {
        if !m.is_spin() || (m.t1.is_none() && m.t2.is_none()) {
            continue;
        }
        let name = &m.name;
        let mut t1_rate = 0.0;
        if let Some(t1) = m.t1 {
            if !(t1 > 0.0) {
                return Err(Error::Physicality(format!("T1 of `{name}` must be positive")));
            }
            t1_rate = 1.0 / t1;
            for key in ["plus", "minus"] {
                out.push(CollapseOperator::new(sys.op(&format!("{name}.{key}"))?, 0.5 * t1_rate)?);
            }
        }
        if let Some(t2) = m.t2 {
            if !(t2 > 0.0) {
                return Err(Error::Physicality(format!("T2 of `{name}` must be positive")));
            }
            if let Some(t1) = m.t1 {
                if t2 > 2.0 * t1 * (1.0 + 1e-12) {
                    return Err(Error::Physicality(format!("`{name}` has T2 = {t2} > 2 T1 = {}", 2.0 * t1)));
                }
            }
            let pure = (1.0 / t2 - 0.5 * t1_rate).max(0.0);
            if pure > 0.0 {
                let z2 = sys.op(&format!("{name}.z"))?.scale_real(2.0);
                out.push(CollapseOperator::new(&z2, 0.5 * pure)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Decl, Member};

    #[test]
    fn parses_both_arrows() {
        assert_eq!(Transition::parse("GS <- ES").unwrap(), Transition { source: "ES".into(), target: "GS".into() });
        assert_eq!(Transition::parse("A->B").unwrap().target, "B");
        assert!(Transition::parse("A -> B -> C").is_err());
        assert!(Transition::parse("A - B").is_err());
    }

    #[test]
    fn companion_rules() {
        let decl = Decl::tensor([
            Decl::sum([Member::level("G").unwrap().into(), Member::level("E").unwrap().into()]),
            Member::spin("S", 1.0).unwrap().into(),
        ]);
        let sys = SpinSystem::new(&decl).unwrap();
        // S is free on both sides: one spin-conserving operator
        let ops = transition_operators(&sys, &RateTable::new().with("E -> G", 4.0)).unwrap();
        assert_eq!(ops.len(), 1);
        assert!((ops[0].op.get(0, 3).re - 2.0).abs() < 1e-15);
        // target-only freedom: uniform repopulation at rate / 3
        let ops = transition_operators(&sys, &RateTable::new().with("E,S[0] -> G", 3.0)).unwrap();
        assert_eq!(ops.len(), 3);
        let total: f64 = ops.iter().map(|c| c.op.frobenius_norm().powi(2)).sum();
        assert!((total - 3.0).abs() < 1e-12);
        // source-only freedom: each source state decays at the full rate
        let ops = transition_operators(&sys, &RateTable::new().with("E -> G,S[1]", 2.0)).unwrap();
        assert_eq!(ops.len(), 3);
        assert!(ops.iter().all(|c| (c.op.frobenius_norm().powi(2) - 2.0).abs() < 1e-12));
        assert!(transition_operators(&sys, &RateTable::new().with("E -> G", 0.0)).unwrap().is_empty());
        assert!(transition_operators(&sys, &RateTable::new().with("E -> X", 1.0)).is_err());
    }

    #[test]
    fn rejects_unphysical_t2() {
        let sys = SpinSystem::new(&Decl::Member(Member::spin("S", 0.5).unwrap().with_t1(1.0).with_t2(3.0))).unwrap();
        assert!(matches!(relaxation_operators(&sys), Err(Error::Physicality(_))));
        let sys = SpinSystem::new(&Decl::Member(Member::spin("S", 0.5).unwrap().with_t1(1.0).with_t2(2.0))).unwrap();
        assert_eq!(relaxation_operators(&sys).unwrap().len(), 2);
    }
}
