//! Finite abelian groups given as products of cyclic factors.
//!
//! Elements and character labels are both residue tuples. Everything that
//! indexes vectors or matrices uses the lexicographic order on those tuples
//! (first factor most significant), so an index in `0..order` is the
//! canonical handle for an element or a character.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::DEFAULT_SUBGROUP_BOUND;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element {
    pub residues: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character {
    pub label: Vec<usize>,
}

impl Element {
    pub fn new(residues: Vec<usize>) -> Self {
        Self { residues }
    }
}

impl Character {
    pub fn new(label: Vec<usize>) -> Self {
        Self { label }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", dash_join(&self.residues))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", dash_join(&self.label))
    }
}

pub(crate) fn dash_join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("-")
}

/// Pairing phases `<c, g>` stored as exact numerators over `lcm(n_j)`.
#[derive(Debug)]
struct CharacterTable {
    phase: Vec<u32>,
    roots: Vec<Complex64>,
}

#[derive(Clone)]
pub struct FiniteAbelianGroup {
    factors: Vec<usize>,
    order: usize,
    strides: Vec<usize>,
    lcm: usize,
    table: Arc<OnceLock<CharacterTable>>,
}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteAbelianGroup").field("factors", &self.factors).finish()
    }
}

impl PartialEq for FiniteAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for FiniteAbelianGroup {}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z{n}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FiniteAbelianGroup {
    /// Builds `Z_{n_1} x ... x Z_{n_k}`. Factors equal to 1 are dropped unless
    /// every factor is 1, in which case the result is the trivial group `Z1`.
    pub fn new(factors: &[usize]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Malformed("a group needs at least one factor".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&n| n == 0) {
            return Err(Error::Malformed(format!("cyclic factor must be >= 1, got {bad}")));
        }
        let mut kept: Vec<usize> = factors.iter().copied().filter(|&n| n > 1).collect();
        if kept.is_empty() {
            kept.push(1);
        }
        let order = kept
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Malformed("group order overflows".into()))?;
        let mut strides = vec![1; kept.len()];
        for j in (0..kept.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * kept[j + 1];
        }
        let lcm = kept.iter().fold(1usize, |acc, &n| acc / gcd(acc, n) * n);
        Ok(Self { factors: kept, order, strides, lcm, table: Arc::new(OnceLock::new()) })
    }

    pub fn trivial() -> Self {
        Self::new(&[1]).expect("trivial group")
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn residues(&self, index: usize) -> Vec<usize> {
        self.factors
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| (index / s) % n)
            .collect()
    }

    fn check_tuple(&self, t: &[usize]) -> Result<()> {
        if t.len() != self.factors.len() {
            return Err(Error::GroupMismatch(format!(
                "tuple of length {} in a group with {} factors",
                t.len(),
                self.factors.len()
            )));
        }
        if let Some((x, n)) = t.iter().zip(&self.factors).find(|(x, n)| *x >= *n) {
            return Err(Error::GroupMismatch(format!("residue {x} out of range for Z{n}")));
        }
        Ok(())
    }

    pub fn index_of_tuple(&self, t: &[usize]) -> Result<usize> {
        self.check_tuple(t)?;
        Ok(t.iter().zip(&self.strides).map(|(x, s)| x * s).sum())
    }

    pub fn element(&self, index: usize) -> Element {
        Element::new(self.residues(index))
    }

    pub fn character(&self, index: usize) -> Character {
        Character::new(self.residues(index))
    }

    pub fn element_index(&self, g: &Element) -> Result<usize> {
        self.index_of_tuple(&g.residues)
    }

    pub fn character_index(&self, chi: &Character) -> Result<usize> {
        self.index_of_tuple(&chi.label)
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order).map(|i| self.element(i))
    }

    pub fn zero(&self) -> Element {
        Element::new(vec![0; self.factors.len()])
    }

    // Index-level arithmetic; the same routines serve characters under
    // the label identification of the dual with G.

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.factors.iter().zip(&self.strides) {
            out += (((a / s) % n + (b / s) % n) % n) * s;
        }
        out
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let mut out = 0;
        for (&n, &s) in self.factors.iter().zip(&self.strides) {
            out += ((n - (a / s) % n) % n) * s;
        }
        out
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    pub fn add(&self, g: &Element, h: &Element) -> Result<Element> {
        let (a, b) = (self.element_index(g)?, self.element_index(h)?);
        Ok(self.element(self.add_idx(a, b)))
    }

    pub fn neg(&self, g: &Element) -> Result<Element> {
        Ok(self.element(self.neg_idx(self.element_index(g)?)))
    }

    pub fn sub(&self, g: &Element, h: &Element) -> Result<Element> {
        let (a, b) = (self.element_index(g)?, self.element_index(h)?);
        Ok(self.element(self.sub_idx(a, b)))
    }

    fn table(&self) -> &CharacterTable {
        self.table.get_or_init(|| {
            let n = self.order;
            let l = self.lcm;
            let roots = (0..l)
                .map(|k| {
                    // exact values at quarter turns
                    if (4 * k) % l == 0 {
                        match 4 * k / l {
                            0 => Complex64::new(1.0, 0.0),
                            1 => Complex64::new(0.0, 1.0),
                            2 => Complex64::new(-1.0, 0.0),
                            _ => Complex64::new(0.0, -1.0),
                        }
                    } else {
                        Complex64::from_polar(1.0, TAU * k as f64 / l as f64)
                    }
                })
                .collect();
            let tuples: Vec<Vec<usize>> = (0..n).map(|i| self.residues(i)).collect();
            let mut phase = Vec::with_capacity(n * n);
            for c in &tuples {
                for g in &tuples {
                    let mut acc = 0usize;
                    for ((cj, gj), &nj) in c.iter().zip(g).zip(&self.factors) {
                        acc = (acc + ((cj * gj) % nj) * (l / nj)) % l;
                    }
                    phase.push(acc as u32);
                }
            }
            CharacterTable { phase, roots }
        })
    }

    /// Phase numerator of `chi_c(g)` over [`Self::phase_denominator`].
    pub fn phase_idx(&self, c: usize, g: usize) -> usize {
        self.table().phase[c * self.order + g] as usize
    }

    pub fn phase_denominator(&self) -> usize {
        self.lcm
    }

    /// `chi_c(g)` for character label index `c` and element index `g`.
    pub fn pair_idx(&self, c: usize, g: usize) -> Complex64 {
        let t = self.table();
        t.roots[t.phase[c * self.order + g] as usize]
    }

    /// `chi_c(g) = prod_j exp(2 pi i c_j g_j / n_j)`.
    pub fn pair(&self, chi: &Character, g: &Element) -> Result<Complex64> {
        Ok(self.pair_idx(self.character_index(chi)?, self.element_index(g)?))
    }

    /// Whether `chi_c(g) = 1`, decided on exact integer phases.
    pub fn pairs_trivially(&self, c: usize, g: usize) -> bool {
        self.phase_idx(c, g) == 0
    }

    pub fn doubling(&self) -> Doubling {
        Doubling { group: self.clone(), invertible: self.factors.iter().all(|n| n % 2 == 1) }
    }

    /// Subgroup generated by the given element indices.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Subgroup {
        let mut members: BTreeSet<usize> = BTreeSet::new();
        members.insert(0);
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.add_idx(x, g);
                if members.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        Subgroup::from_sorted(members.into_iter().collect())
    }

    pub fn enumerate_subgroups(&self) -> Result<Vec<Subgroup>> {
        self.enumerate_subgroups_bounded(DEFAULT_SUBGROUP_BOUND)
    }

    /// Every subgroup, sorted by `(order, canonical_id)`.
    ///
    /// Breadth-first over the lattice: each level adjoins one generator to a
    /// subgroup found on the previous level. Any subgroup of a group with
    /// `k` cyclic factors is generated by at most `k` elements, so the walk
    /// reaches all of them.
    pub fn enumerate_subgroups_bounded(&self, bound: usize) -> Result<Vec<Subgroup>> {
        if self.order > bound {
            return Err(Error::BoundExceeded { order: self.order, bound });
        }
        let trivial = Subgroup::from_sorted(vec![0]);
        let mut seen: HashSet<Vec<usize>> = HashSet::from([trivial.elements.clone()]);
        let mut found = vec![trivial.clone()];
        let mut frontier = vec![trivial];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                let mut inside = vec![false; self.order];
                for &e in &h.elements {
                    inside[e] = true;
                }
                for g in 0..self.order {
                    if inside[g] {
                        continue;
                    }
                    let joined = self.join_with(h, g);
                    if seen.insert(joined.elements.clone()) {
                        found.push(joined.clone());
                        next.push(joined);
                    }
                }
            }
            frontier = next;
        }
        found.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
        Ok(found)
    }

    fn join_with(&self, h: &Subgroup, g: usize) -> Subgroup {
        let mut cyclic = vec![0usize];
        let mut x = g;
        while x != 0 {
            cyclic.push(x);
            x = self.add_idx(x, g);
        }
        let mut members: BTreeSet<usize> = BTreeSet::new();
        for &a in &h.elements {
            for &b in &cyclic {
                members.insert(self.add_idx(a, b));
            }
        }
        Subgroup::from_sorted(members.into_iter().collect())
    }

    pub fn is_subgroup(&self, h: &Subgroup) -> bool {
        if h.elements.is_empty() || h.elements[0] != 0 || h.elements.iter().any(|&e| e >= self.order) {
            return false;
        }
        let set: HashSet<usize> = h.elements.iter().copied().collect();
        h.elements
            .iter()
            .all(|&a| set.contains(&self.neg_idx(a)) && h.elements.iter().all(|&b| set.contains(&self.add_idx(a, b))))
    }

    /// `H^perp`, as a subgroup of character label indices.
    pub fn annihilator(&self, h: &Subgroup) -> Subgroup {
        let elements = (0..self.order)
            .filter(|&c| h.elements.iter().all(|&e| self.pairs_trivially(c, e)))
            .collect();
        Subgroup::from_sorted(elements)
    }

    /// Minimal-index representative of every coset of `h`, in increasing order.
    pub fn coset_rep_indices(&self, h: &Subgroup) -> Vec<usize> {
        let mut covered = vec![false; self.order];
        let mut reps = Vec::with_capacity(self.order / h.order());
        for g in 0..self.order {
            if covered[g] {
                continue;
            }
            reps.push(g);
            for &e in &h.elements {
                covered[self.add_idx(g, e)] = true;
            }
        }
        reps
    }

    pub fn coset_reps(&self, h: &Subgroup) -> Vec<Element> {
        self.coset_rep_indices(h).into_iter().map(|i| self.element(i)).collect()
    }

    /// Index of the minimal representative of `g + h`.
    pub fn coset_rep_of(&self, h: &Subgroup, g: usize) -> usize {
        h.elements.iter().map(|&e| self.add_idx(g, e)).min().unwrap_or(g)
    }
}

impl Serialize for FiniteAbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupSpec { factors: self.factors.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteAbelianGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = GroupSpec::deserialize(d)?;
        FiniteAbelianGroup::new(&spec.factors).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct GroupSpec {
    factors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    /// Sorted element indices; doubles as the canonical id.
    pub elements: Vec<usize>,
}

impl Subgroup {
    pub fn from_sorted(elements: Vec<usize>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Self { elements }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn canonical_id(&self) -> &[usize] {
        &self.elements
    }

    pub fn contains(&self, index: usize) -> bool {
        self.elements.binary_search(&index).is_ok()
    }
}

pub struct Doubling {
    group: FiniteAbelianGroup,
    pub invertible: bool,
}

impl Doubling {
    /// The unique `h` with `h + h = g`; needs every factor odd.
    pub fn halve(&self, g: &Element) -> Result<Element> {
        let idx = self.group.element_index(g)?;
        Ok(self.group.element(self.halve_idx(idx)?))
    }

    pub fn halve_idx(&self, g: usize) -> Result<usize> {
        if !self.invertible {
            return Err(Error::UnsupportedOrder(format!(
                "doubling map of {} is not invertible (even factor)",
                self.group
            )));
        }
        let mut out = 0;
        for (&n, &s) in self.group.factors.iter().zip(&self.group.strides) {
            out += (((g / s) % n) * ((n + 1) / 2) % n) * s;
        }
        Ok(out)
    }
}

/// Parses `Z4xZ2`-style specs: `group := factor ("x" factor)*`,
/// `factor := "Z" integer`. Case-insensitive; whitespace is ignored.
pub fn parse_group(spec: &str) -> Result<FiniteAbelianGroup> {
    let chars: Vec<(usize, char)> = spec.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let end = spec.len();
    let mut pos = 0usize;
    let mut factors = Vec::new();
    loop {
        match chars.get(pos) {
            Some((_, c)) if c.eq_ignore_ascii_case(&'z') => pos += 1,
            Some(&(at, c)) => return Err(Error::Parse { pos: at, msg: format!("expected 'Z', found '{c}'") }),
            None => return Err(Error::Parse { pos: end, msg: "expected 'Z', found end of input".into() }),
        }
        let start = pos;
        let mut digits = String::new();
        if let Some(&(at, '-')) = chars.get(pos) {
            return Err(Error::Parse { pos: at, msg: "cyclic factor must be >= 1".into() });
        }
        while let Some(&(_, c)) = chars.get(pos) {
            if c.is_ascii_digit() {
                digits.push(c);
                pos += 1;
            } else {
                break;
            }
        }
        let at = chars.get(start).map_or(end, |p| p.0);
        if digits.is_empty() {
            return Err(Error::Parse { pos: at, msg: "expected an integer after 'Z'".into() });
        }
        let n: usize = digits
            .parse()
            .map_err(|_| Error::Parse { pos: at, msg: format!("integer '{digits}' out of range") })?;
        if n == 0 {
            return Err(Error::Parse { pos: at, msg: "cyclic factor must be >= 1".into() });
        }
        factors.push(n);
        match chars.get(pos) {
            None => break,
            Some((_, c)) if c.eq_ignore_ascii_case(&'x') => pos += 1,
            Some(&(at, c)) => return Err(Error::Parse { pos: at, msg: format!("expected 'x' or end, found '{c}'") }),
        }
    }
    FiniteAbelianGroup::new(&factors)
}
