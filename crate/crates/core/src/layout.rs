//! Composite-space layout: members combined by tensor products and direct
//! sums.
//!
//! The layout is flattened into *sectors*. A sector is one choice of branch
//! at every direct-sum node; it is a plain tensor product of members and owns
//! a set of global basis indices. Every operator the system builds is an
//! embedding of a local operator into one or more sectors.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qmatrix::{QMatrix, C64};

/// A spin or electronic level. Levels are spins of value zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub name: String,
    twice_spin: u32,
    /// Longitudinal relaxation time in seconds.
    pub t1: Option<f64>,
    /// Transverse relaxation time in seconds.
    pub t2: Option<f64>,
    /// Free-form type tag, e.g. `"NV"` or `"13C"`.
    pub tag: Option<String>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.contains(|c: char| {
            c.is_whitespace() || matches!(c, '[' | ']' | ',' | '.' | '<' | '>' | '(' | ')')
        })
        && !name.contains("->")
}

impl Member {
    /// Spin member of spin `val` (a non-negative half-integer).
    pub fn spin(name: &str, val: f64) -> Result<Self> {
        if !valid_name(name) {
            return Err(Error::Parse(format!("invalid member name `{name}`")));
        }
        let twice = 2.0 * val;
        if !(val >= 0.0) || !val.is_finite() || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(val));
        }
        Ok(Member { name: name.to_string(), twice_spin: twice.round() as u32, t1: None, t2: None, tag: None })
    }

    /// Electronic level (multiplicity one).
    pub fn level(name: &str) -> Result<Self> {
        Self::spin(name, 0.0)
    }

    pub fn with_t1(mut self, t1: f64) -> Self {
        self.t1 = Some(t1);
        self
    }

    pub fn with_t2(mut self, t2: f64) -> Self {
        self.t2 = Some(t2);
        self
    }

    pub fn with_tag(mut self, tag: &str) -> Self {
        self.tag = Some(tag.to_string());
        self
    }

    pub fn val(&self) -> f64 {
        self.twice_spin as f64 / 2.0
    }

    pub fn twice_spin(&self) -> u32 {
        self.twice_spin
    }

    pub fn multiplicity(&self) -> usize {
        self.twice_spin as usize + 1
    }

    pub fn is_spin(&self) -> bool {
        self.twice_spin > 0
    }

    /// `T2 <= 2 T1` when both are present.
    pub fn is_physical(&self) -> bool {
        match (self.t1, self.t2) {
            (Some(t1), Some(t2)) => t2 <= 2.0 * t1 * (1.0 + 1e-12),
            _ => true,
        }
    }
}

/// Nested declaration of a composite space.
#[derive(Clone, Debug)]
pub enum Decl {
    Member(Member),
    /// Tensor product, first child slowest.
    Tensor(Vec<Decl>),
    /// Direct sum, first child on top.
    Sum(Vec<Decl>),
}

impl Decl {
    pub fn tensor(children: impl IntoIterator<Item = Decl>) -> Self {
        Decl::Tensor(children.into_iter().collect())
    }

    pub fn sum(children: impl IntoIterator<Item = Decl>) -> Self {
        Decl::Sum(children.into_iter().collect())
    }
}

impl From<Member> for Decl {
    fn from(m: Member) -> Self {
        Decl::Member(m)
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(usize),
    Tensor(Vec<Node>, usize),
    Sum(Vec<Node>, usize),
}

impl Node {
    fn dim(&self, members: &[Member]) -> usize {
        match self {
            Node::Leaf(m) => members[*m].multiplicity(),
            Node::Tensor(_, d) | Node::Sum(_, d) => *d,
        }
    }

    fn contains(&self, set: &BTreeSet<usize>) -> bool {
        match self {
            Node::Leaf(m) => set.contains(m),
            Node::Tensor(c, _) | Node::Sum(c, _) => c.iter().any(|n| n.contains(set)),
        }
    }

    fn first_member(&self, set: &BTreeSet<usize>) -> Option<usize> {
        match self {
            Node::Leaf(m) => set.contains(m).then_some(*m),
            Node::Tensor(c, _) | Node::Sum(c, _) => c.iter().find_map(|n| n.first_member(set)),
        }
    }
}

/// One tensor-product block of the flattened layout.
#[derive(Clone, Debug)]
pub struct Sector {
    members: Vec<usize>,
    dims: Vec<usize>,
    indices: Vec<usize>,
}

impl Sector {
    /// Member indices in tensor order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Global basis index of each local (row-major) multi-index.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, member: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == member)
    }

    pub fn contains(&self, member: usize) -> bool {
        self.members.contains(&member)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }
}

/// Flattened layout tree with its member registry.
#[derive(Clone, Debug)]
pub struct SpaceLayout {
    members: Vec<Member>,
    root: Node,
    sectors: Vec<Sector>,
}

impl SpaceLayout {
    pub fn new(decl: &Decl) -> Result<Self> {
        let mut members = Vec::new();
        let root = build_node(decl, &mut members)?;
        for (i, m) in members.iter().enumerate() {
            if members[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::Duplicate(m.name.clone()));
            }
        }
        let sectors = flatten(&root, &members)
            .into_iter()
            .map(|(ms, indices)| Sector { dims: ms.iter().map(|&m| members[m].multiplicity()).collect(), members: ms, indices })
            .collect();
        Ok(SpaceLayout { members, root, sectors })
    }

    pub fn dim(&self) -> usize {
        self.root.dim(&self.members)
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.members.iter().position(|m| m.name == name).ok_or_else(|| Error::Unknown(name.to_string()))
    }

    pub fn member(&self, name: &str) -> Result<&Member> {
        Ok(&self.members[self.index_of(name)?])
    }

    /// Sectors containing every listed member.
    pub fn sectors_with(&self, members: &[usize]) -> Vec<usize> {
        (0..self.sectors.len())
            .filter(|&s| members.iter().all(|&m| self.sectors[s].contains(m)))
            .collect()
    }

    /// Embeds `local`, an operator on the joint space of `members` (in the
    /// given order, first slowest), into sector `sector` with identity on the
    /// sector's other members. Entries outside the sector stay zero.
    pub fn embed(&self, sector: usize, members: &[usize], local: &QMatrix) -> Result<QMatrix> {
        let mut trip = Vec::new();
        self.embed_triplets(sector, members, local, &mut trip)?;
        Ok(QMatrix::from_triplets(self.dim(), self.dim(), trip)?.compact())
    }

    /// Sum of [`Self::embed`] over all sectors that contain every member.
    pub fn embed_all(&self, members: &[usize], local: &QMatrix) -> Result<QMatrix> {
        let mut trip = Vec::new();
        for s in self.sectors_with(members) {
            self.embed_triplets(s, members, local, &mut trip)?;
        }
        Ok(QMatrix::from_triplets(self.dim(), self.dim(), trip)?.compact())
    }

    fn embed_triplets(
        &self,
        sector: usize,
        members: &[usize],
        local: &QMatrix,
        out: &mut Vec<(usize, usize, C64)>,
    ) -> Result<()> {
        let sec = &self.sectors[sector];
        let pos: Vec<usize> = members
            .iter()
            .map(|&m| sec.position(m).ok_or_else(|| Error::Unknown(self.members[m].name.clone())))
            .collect::<Result<_>>()?;
        let ldims: Vec<usize> = pos.iter().map(|&p| sec.dims[p]).collect();
        let ld: usize = ldims.iter().product();
        if local.shape() != (ld, ld) {
            return Err(Error::dim(format!("local operator is {:?}, expected {}x{}", local.shape(), ld, ld)));
        }
        let strides = sec.strides();
        let lstr: Vec<usize> = pos.iter().map(|&p| strides[p]).collect();
        // offset in the sector's local flat index for each local-op index
        let sel_offset = |mut k: usize| -> usize {
            let mut off = 0;
            for f in (0..ldims.len()).rev() {
                off += (k % ldims[f]) * lstr[f];
                k /= ldims[f];
            }
            off
        };
        let offs: Vec<usize> = (0..ld).map(sel_offset).collect();
        let rest: Vec<usize> = (0..sec.dims.len()).filter(|f| !pos.contains(f)).collect();
        let mut rest_offs = vec![0usize];
        for &f in &rest {
            let mut next = Vec::with_capacity(rest_offs.len() * sec.dims[f]);
            for &o in &rest_offs {
                for i in 0..sec.dims[f] {
                    next.push(o + i * strides[f]);
                }
            }
            rest_offs = next;
        }
        let entries = local.triplets();
        for &r in &rest_offs {
            for &(i, j, v) in &entries {
                out.push((sec.indices[r + offs[i]], sec.indices[r + offs[j]], v));
            }
        }
        Ok(())
    }

    /// Global state vector of a basis state in `sector`. `groups` assigns a
    /// joint ket to each group of members (group order = ket factor order);
    /// every unassigned member must have multiplicity one.
    pub fn sector_vector(&self, sector: usize, groups: &[(Vec<usize>, Vec<C64>)]) -> Result<Vec<C64>> {
        let sec = &self.sectors[sector];
        let strides = sec.strides();
        let mut covered = vec![false; sec.members.len()];
        let mut entries: Vec<(usize, C64)> = vec![(0, C64::new(1.0, 0.0))];
        for (ms, ket) in groups {
            let pos: Vec<usize> = ms
                .iter()
                .map(|&m| sec.position(m).ok_or_else(|| Error::Unknown(self.members[m].name.clone())))
                .collect::<Result<_>>()?;
            let dims: Vec<usize> = pos.iter().map(|&p| sec.dims[p]).collect();
            if ket.len() != dims.iter().product::<usize>() {
                return Err(Error::dim("group ket length does not match its members"));
            }
            for &p in &pos {
                if covered[p] {
                    return Err(Error::InvalidState(format!("member `{}` assigned twice", self.members[sec.members[p]].name)));
                }
                covered[p] = true;
            }
            let mut next = Vec::new();
            for (k, &a) in ket.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut rem = k;
                let mut off = 0;
                for f in (0..dims.len()).rev() {
                    off += (rem % dims[f]) * strides[pos[f]];
                    rem /= dims[f];
                }
                for &(o, c) in &entries {
                    next.push((o + off, c * a));
                }
            }
            entries = next;
        }
        if let Some(p) = (0..covered.len()).find(|&p| !covered[p] && sec.dims[p] > 1) {
            return Err(Error::InvalidState(format!("member `{}` is not specified", self.members[sec.members[p]].name)));
        }
        let mut v = vec![C64::zero(); self.dim()];
        for (o, c) in entries {
            v[sec.indices[o]] += c;
        }
        Ok(v)
    }

    /// Reduced operator on `keep` plus, when the layout root is a direct sum,
    /// the block of the branches that were not kept.
    pub fn reduce(&self, op: &QMatrix, keep: &[&str]) -> Result<(QMatrix, Option<QMatrix>)> {
        let maps = self.reduction_maps(op, keep)?;
        let reduced = op.reduce_with_maps(&maps);
        let remainder = match &self.root {
            Node::Sum(..) => {
                let used: BTreeSet<usize> = maps.iter().flatten().copied().collect();
                let rest = self.kept_branch_complement(keep, &used)?;
                (!rest.is_empty()).then(|| op.submatrix(&rest, &rest))
            }
            _ => None,
        };
        Ok((reduced, remainder))
    }

    /// Reduced operator on `keep`.
    pub fn ptrace(&self, op: &QMatrix, keep: &[&str]) -> Result<QMatrix> {
        let maps = self.reduction_maps(op, keep)?;
        Ok(op.reduce_with_maps(&maps))
    }

    fn reduction_maps(&self, op: &QMatrix, keep: &[&str]) -> Result<Vec<Vec<usize>>> {
        if !op.is_square() || op.rows() != self.dim() {
            return Err(Error::dim(format!("operator {:?} does not match layout dimension {}", op.shape(), self.dim())));
        }
        if keep.is_empty() {
            return Err(Error::InvalidState("nothing to keep".to_string()));
        }
        let set: BTreeSet<usize> = keep.iter().map(|k| self.index_of(k)).collect::<Result<_>>()?;
        reduce_node(&self.root, &set, &self.members)?.ok_or_else(|| Error::Unknown(keep.join(",")))
    }

    // Indices of the root-level branches that contain no kept member.
    fn kept_branch_complement(&self, _keep: &[&str], used: &BTreeSet<usize>) -> Result<Vec<usize>> {
        let Node::Sum(children, _) = &self.root else { return Ok(Vec::new()) };
        let mut out = Vec::new();
        let mut off = 0;
        for c in children {
            let d = c.dim(&self.members);
            if !(off..off + d).any(|i| used.contains(&i)) {
                out.extend(off..off + d);
            }
            off += d;
        }
        Ok(out)
    }

    /// Global indices of all sectors holding `member` (ascending).
    pub fn block_indices(&self, member: &str) -> Result<Vec<usize>> {
        let m = self.index_of(member)?;
        let secs = self.sectors_with(&[m]);
        if secs.len() == self.sectors.len() {
            return Err(Error::BranchNotFound(member.to_string()));
        }
        let mut idx: Vec<usize> = secs.iter().flat_map(|&s| self.sectors[s].indices.iter().copied()).collect();
        idx.sort_unstable();
        Ok(idx)
    }

    /// Sub-block of `op` on the direct-sum branch holding `member`.
    pub fn project_block(&self, op: &QMatrix, member: &str) -> Result<QMatrix> {
        if !op.is_square() || op.rows() != self.dim() {
            return Err(Error::dim("operator does not match layout dimension"));
        }
        let idx = self.block_indices(member)?;
        Ok(op.submatrix(&idx, &idx))
    }
}

fn build_node(decl: &Decl, members: &mut Vec<Member>) -> Result<Node> {
    match decl {
        Decl::Member(m) => {
            members.push(m.clone());
            Ok(Node::Leaf(members.len() - 1))
        }
        Decl::Tensor(children) | Decl::Sum(children) => {
            if children.is_empty() {
                return Err(Error::EmptyDeclaration);
            }
            let nodes: Vec<Node> = children.iter().map(|c| build_node(c, members)).collect::<Result<_>>()?;
            let dims = nodes.iter().map(|n| n.dim(members));
            Ok(if matches!(decl, Decl::Tensor(_)) {
                let d = dims.product();
                Node::Tensor(nodes, d)
            } else {
                let d = dims.sum();
                Node::Sum(nodes, d)
            })
        }
    }
}

fn flatten(node: &Node, members: &[Member]) -> Vec<(Vec<usize>, Vec<usize>)> {
    match node {
        Node::Leaf(m) => vec![(vec![*m], (0..members[*m].multiplicity()).collect())],
        Node::Sum(children, _) => {
            let mut out = Vec::new();
            let mut off = 0;
            for c in children {
                for (ms, idx) in flatten(c, members) {
                    out.push((ms, idx.into_iter().map(|i| i + off).collect()));
                }
                off += c.dim(members);
            }
            out
        }
        Node::Tensor(children, _) => {
            let mut out: Vec<(Vec<usize>, Vec<usize>)> = vec![(Vec::new(), vec![0])];
            for c in children {
                let d = c.dim(members);
                let subs = flatten(c, members);
                let mut next = Vec::new();
                for (ms, idx) in &out {
                    for (cms, cidx) in &subs {
                        let mut m2 = ms.clone();
                        m2.extend_from_slice(cms);
                        let mut i2 = Vec::with_capacity(idx.len() * cidx.len());
                        for &a in idx {
                            for &b in cidx {
                                i2.push(a * d + b);
                            }
                        }
                        next.push((m2, i2));
                    }
                }
                out = next;
            }
            out
        }
    }
}

// Index maps of a kept subsystem inside `node`, or `None` when the node holds
// no kept member. Each map lists node-local indices of the reduced basis; the
// reduced operator is the sum over maps.
fn reduce_node(node: &Node, keep: &BTreeSet<usize>, members: &[Member]) -> Result<Option<Vec<Vec<usize>>>> {
    match node {
        Node::Leaf(m) => Ok(keep.contains(m).then(|| vec![(0..members[*m].multiplicity()).collect()])),
        Node::Tensor(children, _) => {
            if !node.contains(keep) {
                return Ok(None);
            }
            let mut maps: Vec<Vec<usize>> = vec![vec![0]];
            for c in children {
                let d = c.dim(members);
                let cm = match reduce_node(c, keep, members)? {
                    Some(m) => m,
                    None => (0..d).map(|i| vec![i]).collect(),
                };
                let mut next = Vec::with_capacity(maps.len() * cm.len());
                for a in &maps {
                    for b in &cm {
                        let mut v = Vec::with_capacity(a.len() * b.len());
                        for &x in a {
                            for &y in b {
                                v.push(x * d + y);
                            }
                        }
                        next.push(v);
                    }
                }
                maps = next;
            }
            Ok(Some(maps))
        }
        Node::Sum(children, _) => {
            let mut kept = Vec::new();
            let mut off = 0;
            for c in children {
                if let Some(m) = reduce_node(c, keep, members)? {
                    kept.push((c, off, m));
                }
                off += c.dim(members);
            }
            match kept.len() {
                0 => Ok(None),
                1 => {
                    let (_, off, m) = kept.pop().unwrap();
                    Ok(Some(m.into_iter().map(|v| v.into_iter().map(|i| i + off).collect()).collect()))
                }
                _ => {
                    let mut joined = Vec::new();
                    for (c, off, m) in kept {
                        if m.len() != 1 {
                            let name = c.first_member(keep).map(|i| members[i].name.clone()).unwrap_or_default();
                            return Err(Error::Inseparable(name));
                        }
                        joined.extend(m[0].iter().map(|i| i + off));
                    }
                    Ok(Some(vec![joined]))
                }
            }
        }
    }
}

/// Display form of a magnetic number given as twice its value.
pub fn format_m(twice_m: i32) -> String {
    format!("{}", twice_m as f64 / 2.0)
}

/// Parses a magnetic number into twice its value.
pub fn parse_m(text: &str) -> Result<i32> {
    let v: f64 = text.trim().parse().map_err(|_| Error::Parse(format!("invalid magnetic number `{text}`")))?;
    let t = 2.0 * v;
    if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
        return Err(Error::Parse(format!("`{text}` is not a half-integer")));
    }
    Ok(t.round() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nv() -> SpaceLayout {
        let gs = Member::level("GS").unwrap();
        let es = Member::level("ES").unwrap();
        let s = Member::spin("S", 1.0).unwrap();
        let ss = Member::level("SS").unwrap();
        SpaceLayout::new(&Decl::sum([Decl::tensor([Decl::sum([gs.into(), es.into()]), s.into()]), ss.into()])).unwrap()
    }

    #[test]
    fn nv_sectors() {
        let l = nv();
        assert_eq!(l.dim(), 7);
        assert_eq!(l.sectors().len(), 3);
        assert_eq!(l.sectors()[0].indices(), &[0, 1, 2]);
        assert_eq!(l.sectors()[1].indices(), &[3, 4, 5]);
        assert_eq!(l.sectors()[2].indices(), &[6]);
        assert_eq!(l.block_indices("SS").unwrap(), vec![6]);
        assert!(matches!(l.block_indices("S"), Ok(v) if v.len() == 6));
    }

    #[test]
    fn levels_inside_tensor_interleave() {
        let s = Member::spin("S", 0.5).unwrap();
        let g = Member::level("G").unwrap();
        let e = Member::level("E").unwrap();
        let l = SpaceLayout::new(&Decl::tensor([s.into(), Decl::sum([g.into(), e.into()])])).unwrap();
        assert_eq!(l.block_indices("G").unwrap(), vec![0, 2]);
    }

    #[test]
    fn rejects_bad_declarations() {
        assert!(matches!(Member::spin("S", 0.3), Err(Error::InvalidSpin(_))));
        assert!(Member::spin("S[1]", 0.5).is_err());
        assert_eq!(SpaceLayout::new(&Decl::tensor([])).unwrap_err(), Error::EmptyDeclaration);
        let a = Member::spin("A", 0.5).unwrap();
        assert!(matches!(SpaceLayout::new(&Decl::tensor([a.clone().into(), a.into()])), Err(Error::Duplicate(_))));
    }

    #[test]
    fn m_round_trip() {
        for t in -5..=5 {
            assert_eq!(parse_m(&format_m(t)).unwrap(), t);
        }
        assert_eq!(format_m(-1), "-0.5");
        assert_eq!(format_m(2), "1");
        assert!(parse_m("0.3").is_err());
    }
}
