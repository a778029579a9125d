//! Spin systems: operator dictionaries, ghost spins and alternate bases.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::layout::{format_m, Decl, Member, SpaceLayout};
use crate::qmatrix::{eig_hermitian, QMatrix, Tolerances, C64};

/// Cartesian and ladder operators of a single spin, Zeeman basis ordered by
/// descending magnetic number.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub x: QMatrix,
    pub y: QMatrix,
    pub z: QMatrix,
    pub plus: QMatrix,
    pub minus: QMatrix,
}

pub fn spin_operators(twice_spin: u32) -> SpinOperators {
    let n = twice_spin as usize + 1;
    let s = twice_spin as f64 / 2.0;
    let m = |k: usize| s - k as f64;
    let z = QMatrix::diag_real(&(0..n).map(m).collect::<Vec<_>>());
    let plus = QMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            let mj = m(j);
            C64::new((s * (s + 1.0) - mj * (mj + 1.0)).sqrt(), 0.0)
        } else {
            C64::zero()
        }
    });
    let minus = plus.adjoint();
    let x = (&plus + &minus).scale_real(0.5);
    let y = (&plus - &minus).scale(C64::new(0.0, -0.5));
    SpinOperators { x, y, z, plus, minus }
}

/// One total-spin multiplet of a ghost spin.
#[derive(Clone, Debug)]
pub struct Multiplet {
    /// Label such as `C_1` or `C_2a`.
    pub label: String,
    pub twice_j: u32,
    /// States with `M = J, J-1, ..., -J` on the joint Zeeman space of the
    /// ghost's members.
    pub states: Vec<Vec<C64>>,
}

impl Multiplet {
    pub fn state(&self, twice_m: i32) -> Option<&Vec<C64>> {
        let j = self.twice_j as i32;
        if twice_m.abs() > j || (j - twice_m) % 2 != 0 {
            return None;
        }
        self.states.get(((j - twice_m) / 2) as usize)
    }
}

/// Coupled-basis description attached to a group of spins.
#[derive(Clone, Debug)]
pub struct GhostSpin {
    pub name: String,
    pub members: Vec<usize>,
    pub multiplets: Vec<Multiplet>,
}

/// Basis change: `from` has the new basis states as columns (in the original
/// basis); `to = from^†`.
#[derive(Clone, Debug)]
pub struct Basis {
    pub to: QMatrix,
    pub from: QMatrix,
    pub states: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SpinSystem {
    layout: SpaceLayout,
    ops: BTreeMap<String, QMatrix>,
    bases: BTreeMap<String, Basis>,
    ghosts: Vec<GhostSpin>,
    named_states: BTreeMap<String, Vec<C64>>,
    warnings: Vec<String>,
}

impl SpinSystem {
    pub fn new(decl: &Decl) -> Result<Self> {
        let layout = SpaceLayout::new(decl)?;
        let mut ops = BTreeMap::new();
        let mut warnings = Vec::new();
        for (idx, m) in layout.members().iter().enumerate() {
            let n = m.multiplicity();
            ops.insert(format!("{}.id", m.name), layout.embed_all(&[idx], &QMatrix::identity(n))?);
            if !m.is_physical() {
                warnings.push(format!("member `{}` has T2 > 2 T1", m.name));
            }
            if !m.is_spin() {
                continue;
            }
            let so = spin_operators(m.twice_spin());
            for (key, local) in [("x", &so.x), ("y", &so.y), ("z", &so.z), ("plus", &so.plus), ("minus", &so.minus)] {
                ops.insert(format!("{}.{}", m.name, key), layout.embed_all(&[idx], local)?);
            }
            let t = m.twice_spin() as i32;
            for k in 0..n {
                let p = QMatrix::from_fn(n, n, |i, j| if i == k && j == k { C64::one() } else { C64::zero() });
                ops.insert(format!("{}.p[{}]", m.name, format_m(t - 2 * k as i32)), layout.embed_all(&[idx], &p)?);
            }
        }
        Ok(SpinSystem { layout, ops, bases: BTreeMap::new(), ghosts: Vec::new(), named_states: BTreeMap::new(), warnings })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn member(&self, name: &str) -> Result<&Member> {
        self.layout.member(name)
    }

    pub fn members(&self) -> &[Member] {
        self.layout.members()
    }

    /// Operator by key, e.g. `"S.z"`, `"S.p[-0.5]"`, `"GS.id"`, `"C_1.p[0]"`.
    pub fn op(&self, key: &str) -> Result<&QMatrix> {
        self.ops.get(key).ok_or_else(|| Error::Unknown(key.to_string()))
    }

    pub fn has_op(&self, key: &str) -> bool {
        self.ops.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(|k| k.as_str())
    }

    pub fn identity(&self) -> QMatrix {
        QMatrix::identity(self.dim())
    }

    /// Non-fatal consistency notes gathered during construction.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn ghosts(&self) -> &[GhostSpin] {
        &self.ghosts
    }

    /// Multiplet by label, with the ghost it belongs to.
    pub fn multiplet(&self, label: &str) -> Option<(&GhostSpin, &Multiplet)> {
        self.ghosts.iter().find_map(|g| g.multiplets.iter().find(|m| m.label == label).map(|m| (g, m)))
    }

    pub fn basis(&self, name: &str) -> Result<&Basis> {
        self.bases.get(name).ok_or_else(|| Error::Unknown(name.to_string()))
    }

    /// Full-space vector of a state created by [`Self::add_basis`].
    pub fn named_state(&self, name: &str) -> Option<&Vec<C64>> {
        self.named_states.get(name)
    }

    /// `to · op · from` for the named basis.
    pub fn to_basis(&self, op: &QMatrix, basis: &str) -> Result<QMatrix> {
        let b = self.basis(basis)?;
        (&b.to * op).try_matmul(&b.from)
    }

    pub fn from_basis(&self, op: &QMatrix, basis: &str) -> Result<QMatrix> {
        let b = self.basis(basis)?;
        (&b.from * op).try_matmul(&b.to)
    }

    /// Reduced operator on `keep`; for layouts whose root is a direct sum the
    /// block of the dropped branches is returned as well.
    pub fn subsystem(&self, op: &QMatrix, keep: &[&str]) -> Result<(QMatrix, Option<QMatrix>)> {
        self.layout.reduce(op, keep)
    }

    pub(crate) fn insert_op(&mut self, key: &str, op: QMatrix) -> Result<()> {
        if op.shape() != (self.dim(), self.dim()) {
            return Err(Error::dim(format!("operator `{key}` does not match the system dimension")));
        }
        if self.ops.contains_key(key) {
            return Err(Error::Duplicate(key.to_string()));
        }
        self.ops.insert(key.to_string(), op);
        Ok(())
    }

    fn check_free_name(&self, name: &str) -> Result<()> {
        let prefix = format!("{name}.");
        if self.layout.index_of(name).is_ok()
            || self.bases.contains_key(name)
            || self.named_states.contains_key(name)
            || self.ops.keys().any(|k| k.starts_with(&prefix))
        {
            return Err(Error::Duplicate(name.to_string()));
        }
        Ok(())
    }

    // Lifts a local operator on `members` to the full space, acting as the
    // identity on sectors that do not contain the members.
    fn lift_transform(&self, members: &[usize], local: &QMatrix) -> Result<QMatrix> {
        let mut t = self.layout.embed_all(members, local)?;
        let inside = self.layout.sectors_with(members);
        let mut trip = Vec::new();
        for (s, sec) in self.layout.sectors().iter().enumerate() {
            if !inside.contains(&s) {
                trip.extend(sec.indices().iter().map(|&i| (i, i, C64::one())));
            }
        }
        if !trip.is_empty() {
            t = t.try_add(&QMatrix::from_triplets(self.dim(), self.dim(), trip)?)?;
        }
        Ok(t.to_dense())
    }

    /// Adds coupled-basis operators for `members`, coupled left to right.
    ///
    /// Each total-spin multiplet gets the label `{name}_{2J+1}` (with `a`,
    /// `b`, ... suffixes when a multiplicity occurs more than once) and the
    /// operators `label.p[M]`, `label.id` and, for `J > 0`, `label.x`,
    /// `label.y`, `label.z`, `label.plus`, `label.minus`. The basis `name`
    /// maps operators into the coupled basis.
    pub fn add_ghostspin(&self, name: &str, members: &[&str]) -> Result<SpinSystem> {
        if members.is_empty() {
            return Err(Error::EmptyDeclaration);
        }
        self.check_free_name(name)?;
        let idx: Vec<usize> = members.iter().map(|m| self.layout.index_of(m)).collect::<Result<_>>()?;
        for (k, &i) in idx.iter().enumerate() {
            if !self.layout.members()[i].is_spin() {
                return Err(Error::domain(format!("`{}` is not a spin", members[k])));
            }
            if idx[..k].contains(&i) {
                return Err(Error::Duplicate(members[k].to_string()));
            }
        }
        let with_all = self.layout.sectors_with(&idx);
        let with_any = (0..self.layout.sectors().len())
            .filter(|&s| idx.iter().any(|&m| self.layout.sectors()[s].contains(m)))
            .count();
        if with_all.is_empty() || with_all.len() != with_any {
            return Err(Error::Inseparable(members.join(",")));
        }
        let twice: Vec<u32> = idx.iter().map(|&i| self.layout.members()[i].twice_spin()).collect();
        let multiplets = couple(name, &twice)?;
        for m in &multiplets {
            self.check_free_name(&m.label)?;
        }

        let mut sys = self.clone();
        let dims: Vec<usize> = twice.iter().map(|&t| t as usize + 1).collect();
        let d: usize = dims.iter().product();
        let mut columns = Vec::with_capacity(d);
        for mult in &multiplets {
            let v = QMatrix::from_columns(&mult.states)?;
            let mut id = QMatrix::zeros(d, d);
            for (k, st) in mult.states.iter().enumerate() {
                let ket = QMatrix::ket(st)?;
                let proj = &ket * &ket.adjoint();
                id = &id + &proj;
                let m = format_m(mult.twice_j as i32 - 2 * k as i32);
                sys.ops.insert(format!("{}.p[{}]", mult.label, m), self.layout.embed_all(&idx, &proj)?);
            }
            sys.ops.insert(format!("{}.id", mult.label), self.layout.embed_all(&idx, &id)?);
            if mult.twice_j > 0 {
                let so = spin_operators(mult.twice_j);
                let vd = v.adjoint();
                for (key, local) in [("x", &so.x), ("y", &so.y), ("z", &so.z), ("plus", &so.plus), ("minus", &so.minus)] {
                    let op = &(&v * local) * &vd;
                    sys.ops.insert(format!("{}.{}", mult.label, key), self.layout.embed_all(&idx, &op)?);
                }
            }
            columns.extend(mult.states.iter().cloned());
        }
        let v = QMatrix::from_columns(&columns)?;
        let from = sys.lift_transform(&idx, &v)?;
        let to = from.adjoint();
        let labels = multiplets.iter().map(|m| m.label.clone()).collect();
        sys.bases.insert(name.to_string(), Basis { to, from, states: labels });
        sys.ghosts.push(GhostSpin { name: name.to_string(), members: idx, multiplets });
        Ok(sys)
    }

    /// Adds a user-defined basis over the full space. Column `k` of
    /// `transform` is the state `states[k]` written in the current basis;
    /// `{state}.id` projectors are created for every named state.
    pub fn add_basis(&self, name: &str, transform: &QMatrix, states: &[&str]) -> Result<SpinSystem> {
        self.add_basis_tol(name, transform, states, &Tolerances::DEFAULT)
    }

    pub fn add_basis_tol(&self, name: &str, transform: &QMatrix, states: &[&str], tol: &Tolerances) -> Result<SpinSystem> {
        if transform.shape() != (self.dim(), self.dim()) {
            return Err(Error::dim(format!(
                "basis transform is {:?}, system dimension is {}",
                transform.shape(),
                self.dim()
            )));
        }
        let dev = transform.unitarity_deviation();
        if dev > tol.unitary {
            return Err(Error::NotUnitary(dev));
        }
        if states.len() > self.dim() {
            return Err(Error::dim("more state names than basis vectors"));
        }
        self.check_free_name(name)?;
        for (k, s) in states.iter().enumerate() {
            if states[..k].contains(s) || *s == name {
                return Err(Error::Duplicate(s.to_string()));
            }
            self.check_free_name(s)?;
        }
        let mut sys = self.clone();
        let from = transform.to_dense();
        for (k, s) in states.iter().enumerate() {
            let col = from.column(k);
            let ket = QMatrix::ket(&col)?;
            sys.ops.insert(format!("{s}.id"), &ket * &ket.adjoint());
            sys.named_states.insert(s.to_string(), col);
        }
        sys.bases.insert(
            name.to_string(),
            Basis { to: from.adjoint(), from, states: states.iter().map(|s| s.to_string()).collect() },
        );
        Ok(sys)
    }
}

// Sequential left-to-right coupling of spins with the given `2s` values.
fn couple(name: &str, twice: &[u32]) -> Result<Vec<Multiplet>> {
    struct Raw {
        twice_j: u32,
        states: Vec<Vec<C64>>,
    }
    let first = twice[0];
    let n0 = first as usize + 1;
    let mut current: Vec<Raw> = vec![Raw {
        twice_j: first,
        states: (0..n0).map(|k| (0..n0).map(|i| if i == k { C64::one() } else { C64::zero() }).collect()).collect(),
    }];
    let mut dim = n0;
    for &ts in &twice[1..] {
        let ns = ts as usize + 1;
        let new_dim = dim * ns;
        let mut next = Vec::new();
        for parent in &current {
            let tj = parent.twice_j;
            let lo = (tj as i32 - ts as i32).unsigned_abs();
            let mut tjp = lo;
            while tjp <= tj + ts {
                next.push(Raw { twice_j: tjp, states: multiplet_states(parent.twice_j, &parent.states, dim, ts, tjp)? });
                tjp += 2;
            }
        }
        current = next;
        dim = new_dim;
    }
    // labels with suffixes for repeated multiplicities
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for r in &current {
        *counts.entry(r.twice_j).or_default() += 1;
    }
    let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
    Ok(current
        .into_iter()
        .map(|r| {
            let k = seen.entry(r.twice_j).or_default();
            let mut label = format!("{}_{}", name, r.twice_j + 1);
            if counts[&r.twice_j] > 1 {
                label.push((b'a' + *k as u8) as char);
            }
            *k += 1;
            Multiplet { label, twice_j: r.twice_j, states: r.states }
        })
        .collect())
}

// States |J', M'> (M' descending) obtained by coupling the parent multiplet
// (2J = `tj`, states on a `dim`-dimensional space) with a fresh spin `ts`.
fn multiplet_states(tj: u32, parent: &[Vec<C64>], dim: usize, ts: u32, tjp: u32) -> Result<Vec<Vec<C64>>> {
    let ns = ts as usize + 1;
    let nd = dim * ns;
    // product vectors |J,M> ⊗ |s,m>
    let product = |a: usize, b: usize| -> Vec<C64> {
        let mut v = vec![C64::zero(); nd];
        for (i, &x) in parent[a].iter().enumerate() {
            v[i * ns + b] = x;
        }
        v
    };
    // operators of the parent multiplet in its own basis plus the new spin
    let sj = spin_operators(tj);
    let ss = spin_operators(ts);
    let nj = tj as usize + 1;
    // Work in the (2J+1)(2s+1) product basis |a,b>.
    let id_j = QMatrix::identity(nj);
    let id_s = QMatrix::identity(ns);
    let jx = &sj.x.kron(&id_s) + &id_j.kron(&ss.x);
    let jy = &sj.y.kron(&id_s) + &id_j.kron(&ss.y);
    let jz = &sj.z.kron(&id_s) + &id_j.kron(&ss.z);
    let s2 = &(&(&jx * &jx) + &(&jy * &jy)) + &(&jz * &jz);
    let jminus = &sj.minus.kron(&id_s) + &id_j.kron(&ss.minus);
    // |a,b> with a,b such that M + m = J'
    let target = tjp as i32;
    let top: Vec<usize> = (0..nj * ns)
        .filter(|&k| {
            let (a, b) = (k / ns, k % ns);
            (tj as i32 - 2 * a as i32) + (ts as i32 - 2 * b as i32) == target
        })
        .collect();
    let sub = s2.submatrix(&top, &top);
    let eig = eig_hermitian(&sub)?;
    let want = tjp as f64 / 2.0 * (tjp as f64 / 2.0 + 1.0);
    let k = (0..eig.values.len())
        .min_by(|&x, &y| (eig.values[x] - want).abs().partial_cmp(&(eig.values[y] - want).abs()).unwrap())
        .ok_or_else(|| Error::domain("empty coupling subspace"))?;
    if (eig.values[k] - want).abs() > 1e-8 {
        return Err(Error::domain("total spin not found in coupling subspace"));
    }
    let mut coeff = vec![C64::zero(); nj * ns];
    for (p, &t) in top.iter().enumerate() {
        coeff[t] = eig.vectors.get(p, k);
    }
    let mut local: Vec<Vec<C64>> = Vec::new();
    let mut cur = coeff;
    for step in 0..=tjp as usize {
        // phase: first nonzero component (in the full joint basis) real positive
        if step == 0 {
            let full = expand(&cur, &product, nd, nj, ns);
            if let Some(first) = full.iter().find(|v| v.norm() > 1e-12) {
                let ph = first.conj() / first.norm();
                for c in cur.iter_mut() {
                    *c *= ph;
                }
            }
        }
        local.push(cur.clone());
        if step < tjp as usize {
            let mut lowered = jminus.apply_vec(&cur);
            let norm = lowered.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for v in lowered.iter_mut() {
                *v /= norm;
            }
            cur = lowered;
        }
    }
    Ok(local.iter().map(|c| expand(c, &product, nd, nj, ns)).collect())
}

fn expand(coeff: &[C64], product: &dyn Fn(usize, usize) -> Vec<C64>, nd: usize, nj: usize, ns: usize) -> Vec<C64> {
    let mut out = vec![C64::zero(); nd];
    for a in 0..nj {
        for b in 0..ns {
            let c = coeff[a * ns + b];
            if c.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(product(a, b)) {
                *o += c * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> SpinSystem {
        let a = Member::spin("A", 0.5).unwrap();
        let b = Member::spin("B", 0.5).unwrap();
        SpinSystem::new(&Decl::tensor([a.into(), b.into()])).unwrap()
    }

    #[test]
    fn two_spin_ordering() {
        let s = pair();
        assert_eq!(s.dim(), 4);
        assert!(s.op("A.z").unwrap().approx_eq(&QMatrix::diag_real(&[0.5, 0.5, -0.5, -0.5]), 0.0));
        assert!(s.has_op("B.p[-0.5]"));
    }

    #[test]
    fn singlet_triplet_projectors() {
        let s = pair().add_ghostspin("C", &["A", "B"]).unwrap();
        let r = 0.5f64.sqrt();
        let singlet = QMatrix::ket(&[C64::zero(), C64::new(r, 0.0), C64::new(-r, 0.0), C64::zero()]).unwrap();
        let t0 = QMatrix::ket(&[C64::zero(), C64::new(r, 0.0), C64::new(r, 0.0), C64::zero()]).unwrap();
        assert!(s.op("C_1.p[0]").unwrap().approx_eq(&(&singlet * &singlet.adjoint()), 1e-14));
        assert!(s.op("C_3.p[0]").unwrap().approx_eq(&(&t0 * &t0.adjoint()), 1e-14));
        let b = s.basis("C").unwrap();
        assert!((&b.from * &b.to).approx_eq(&QMatrix::identity(4), 1e-12));
    }

    #[test]
    fn three_spins_get_suffixes() {
        let decl = Decl::tensor(["A", "B", "D"].map(|n| Member::spin(n, 0.5).unwrap().into()));
        let s = SpinSystem::new(&decl).unwrap().add_ghostspin("C", &["A", "B", "D"]).unwrap();
        let labels: Vec<_> = s.ghosts()[0].multiplets.iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["C_2a", "C_2b", "C_4"]);
    }
}
