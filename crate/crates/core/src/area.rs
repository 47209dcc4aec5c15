//! Area oracles for null-homotopic words.
//!
//! * [`area_bfs`]: exact search over relator applications, bidirectional,
//!   on cyclic words (area is invariant under conjugation).
//! * [`area_winding`]: winding-number area for `<a, b | [a, b]>`.
//! * [`dehn_greedy`]: Dehn's algorithm for `C'(1/6)` presentations.
//! * [`raag_normalization_bound`]: commutation count of greedy RAAG
//!   normalization.
//! * [`area_dispatch`]: picks the right oracle for a model.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Family, GroupModel, Raag};
use crate::presentation::Presentation;
use crate::word::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaGrade {
    Exact,
    ExactWithinBudget,
    UpperBound,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaBudget {
    /// Extra intermediate word length allowed beyond `|w|`.
    pub slack: Option<usize>,
    pub area_cap: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub value: usize,
    pub grade: AreaGrade,
    pub budget: AreaBudget,
}

impl AreaEstimate {
    pub fn exact(value: usize) -> Self {
        AreaEstimate {
            value,
            grade: AreaGrade::Exact,
            budget: AreaBudget::default(),
        }
    }

    pub fn upper_bound(value: usize) -> Self {
        AreaEstimate {
            value,
            grade: AreaGrade::UpperBound,
            budget: AreaBudget::default(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.grade == AreaGrade::Exact
    }
}

/// Knobs for [`area_dispatch`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaConfig {
    /// Words at most this long are also run through [`area_bfs`].
    pub bfs_threshold: usize,
    pub slack: Option<usize>,
    pub area_cap: Option<usize>,
    /// Upper limit on states visited by one search.
    pub max_states: usize,
}

impl Default for AreaConfig {
    fn default() -> Self {
        AreaConfig {
            bfs_threshold: 10,
            slack: None,
            area_cap: None,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

pub const DEFAULT_MAX_STATES: usize = 4_000_000;

pub fn default_slack(len: usize) -> usize {
    len.max(8)
}

pub fn default_area_cap(len: usize) -> usize {
    (10 * len * len).max(1)
}

/// Minimal area found by the bounded search, `None` if the search
/// exhausted its budget.
pub fn search_area(p: &Presentation, letters: &[Letter], slack: usize, area_cap: usize) -> Option<usize> {
    RelatorSearch::new(p).run(letters, slack, area_cap, DEFAULT_MAX_STATES)
}

/// Exact minimal area within an intermediate-length slack and an area cap.
/// The value is graded `Exact` when it does not change when the slack grows
/// by two.
pub fn area_bfs(p: &Presentation, w: &Word, slack: Option<usize>, area_cap: Option<usize>) -> Result<AreaEstimate> {
    area_bfs_with_limit(p, w, slack, area_cap, DEFAULT_MAX_STATES)
}

pub fn area_bfs_with_limit(
    p: &Presentation,
    w: &Word,
    slack: Option<usize>,
    area_cap: Option<usize>,
    max_states: usize,
) -> Result<AreaEstimate> {
    let w = w.free_reduce();
    let slack = slack.unwrap_or_else(|| default_slack(w.len()));
    let cap = area_cap.unwrap_or_else(|| default_area_cap(w.len()));
    let search = RelatorSearch::new(p);
    let budget = AreaBudget {
        slack: Some(slack),
        area_cap: Some(cap),
    };
    let first = search.run(&w.0, slack, cap, max_states);
    let second = search.run(&w.0, slack + 2, cap, max_states);
    match (first, second) {
        (Some(a), Some(b)) if a == b => Ok(AreaEstimate {
            value: a,
            grade: AreaGrade::Exact,
            budget,
        }),
        (a, b) => match a.into_iter().chain(b).min() {
            Some(v) => Ok(AreaEstimate {
                value: v,
                grade: AreaGrade::ExactWithinBudget,
                budget,
            }),
            None => Err(Error::NotFilledWithinBudget { slack, area_cap: cap }),
        },
    }
}

type Code = u8;

/// Breadth-first search over cyclic words, one edge per relator
/// application.
struct RelatorSearch {
    rank: usize,
    /// Every cyclic shift of every relator and inverse, as letter codes.
    cells: Vec<Vec<Code>>,
}

impl RelatorSearch {
    fn new(p: &Presentation) -> Self {
        let rank = p.rank();
        let cells = p
            .symmetrized_relators()
            .into_iter()
            .map(|w| w.0.iter().map(|l| encode(*l, rank)).collect())
            .collect();
        RelatorSearch { rank, cells }
    }

    fn inv(&self, c: Code) -> Code {
        let r = self.rank as Code;
        if c < r {
            c + r
        } else {
            c - r
        }
    }

    /// Free and cyclic reduction followed by the least rotation.
    fn canonical(&self, letters: &[Code]) -> Vec<Code> {
        let mut st: Vec<Code> = Vec::with_capacity(letters.len());
        for &c in letters {
            if st.last() == Some(&self.inv(c)) {
                st.pop();
            } else {
                st.push(c);
            }
        }
        let (mut i, mut j) = (0, st.len());
        while j > i + 1 && st[i] == self.inv(st[j - 1]) {
            i += 1;
            j -= 1;
        }
        least_rotation(&st[i..j])
    }

    fn neighbours(&self, c: &[Code], max_len: usize, out: &mut Vec<Vec<Code>>) {
        let n = c.len();
        let starts = n.max(1);
        let mut buf: Vec<Code> = Vec::with_capacity(max_len + 16);
        for i in 0..starts {
            for cell in &self.cells {
                let r = cell.len();
                for k in 0..=r.min(n) {
                    if k > 0 && cell[k - 1] != c[(i + k - 1) % n] {
                        break;
                    }
                    // replace u = cell[..k] by v = inverse(cell[k..])
                    buf.clear();
                    buf.extend(cell[k..].iter().rev().map(|&x| self.inv(x)));
                    for t in 0..(n - k) {
                        buf.push(c[(i + k + t) % n]);
                    }
                    let next = self.canonical(&buf);
                    if next.len() <= max_len {
                        out.push(next);
                    }
                }
            }
        }
    }

    fn run(&self, letters: &[Letter], slack: usize, area_cap: usize, max_states: usize) -> Option<usize> {
        let codes: Vec<Code> = letters.iter().map(|l| encode(*l, self.rank)).collect();
        let start = self.canonical(&codes);
        if start.is_empty() {
            return Some(0);
        }
        if self.cells.is_empty() {
            return None;
        }
        let max_len = letters.len() + slack;
        let mut seen: [FxHashMap<Vec<Code>, usize>; 2] = [FxHashMap::default(), FxHashMap::default()];
        let mut frontier: [Vec<Vec<Code>>; 2] = [vec![start.clone()], vec![Vec::new()]];
        let mut depth = [0usize; 2];
        seen[0].insert(start, 0);
        seen[1].insert(Vec::new(), 0);
        let mut scratch = Vec::new();
        while depth[0] + depth[1] < area_cap {
            if frontier[0].is_empty() || frontier[1].is_empty() {
                return None;
            }
            let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
            let other = 1 - side;
            let mut next = Vec::new();
            let mut best: Option<usize> = None;
            for state in std::mem::take(&mut frontier[side]) {
                scratch.clear();
                self.neighbours(&state, max_len, &mut scratch);
                for nb in scratch.drain(..) {
                    if let Some(&d) = seen[other].get(&nb) {
                        let total = depth[side] + 1 + d;
                        best = Some(best.map_or(total, |b: usize| b.min(total)));
                    }
                    if !seen[side].contains_key(&nb) {
                        seen[side].insert(nb.clone(), depth[side] + 1);
                        next.push(nb);
                    }
                }
            }
            if let Some(b) = best {
                return (b <= area_cap).then_some(b);
            }
            if seen[0].len() + seen[1].len() > max_states {
                return None;
            }
            depth[side] += 1;
            frontier[side] = next;
        }
        None
    }
}

fn encode(l: Letter, rank: usize) -> Code {
    l.rank(rank) as Code
}

fn least_rotation(s: &[Code]) -> Vec<Code> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0;
    for cand in 1..n {
        for t in 0..n {
            let (a, b) = (s[(cand + t) % n], s[(best + t) % n]);
            if a != b {
                if a < b {
                    best = cand;
                }
                break;
            }
        }
    }
    (0..n).map(|t| s[(best + t) % n]).collect()
}

/// Exact area in `<a, b | [a, b]>`: the sum over unit cells of the absolute
/// winding number of the lattice path.
pub fn area_winding(w: &Word) -> Result<AreaEstimate> {
    if w.0.iter().any(|l| l.generator() > 1) {
        return Err(Error::InvalidInput("winding area needs a two-generator word".into()));
    }
    let e = w.exponent_sums(2);
    if e[0] != 0 || e[1] != 0 {
        return Err(Error::NotNullHomotopic);
    }
    // column x -> (height -> signed count of horizontal edges)
    let mut columns: BTreeMap<i64, BTreeMap<i64, i64>> = BTreeMap::new();
    let (mut x, mut y) = (0i64, 0i64);
    for l in &w.0 {
        match (l.generator(), l.is_inverse()) {
            (0, false) => {
                *columns.entry(x).or_default().entry(y).or_default() += 1;
                x += 1;
            }
            (0, true) => {
                x -= 1;
                *columns.entry(x).or_default().entry(y).or_default() -= 1;
            }
            (_, false) => y += 1,
            (_, true) => y -= 1,
        }
    }
    // The winding number of cell (x, j) is minus the signed count of
    // horizontal edges of column x strictly above height j.
    let mut area: i64 = 0;
    for edges in columns.values() {
        let heights: Vec<(i64, i64)> = edges.iter().map(|(&h, &c)| (h, c)).collect();
        let mut above = 0i64;
        for k in (1..heights.len()).rev() {
            above += heights[k].1;
            let gap = heights[k].0 - heights[k - 1].0;
            area += above.abs() * gap;
        }
    }
    Ok(AreaEstimate::exact(area as usize))
}

/// Dehn's algorithm on a `C'(1/6)` model. Returns whether the word is
/// trivial, and on success the number of relator replacements as an area
/// upper bound.
pub fn dehn_greedy(model: &GroupModel, w: &Word) -> Result<(bool, AreaEstimate)> {
    let sc = match model.small_cancellation() {
        Some(sc) => sc,
        None if model.presentation().relators.is_empty() => {
            let trivial = w.free_reduce().is_empty();
            return Ok((trivial, AreaEstimate::upper_bound(0)));
        }
        None => {
            return Err(Error::Unsupported(
                "Dehn's algorithm needs a C'(1/6) presentation".into(),
            ))
        }
    };
    let (rest, count) = sc.dehn_reduce(&w.0);
    Ok((rest.is_empty(), AreaEstimate::upper_bound(count)))
}

/// Commutations used by greedy left-to-right cancellation in a
/// right-angled Artin group.
pub fn raag_normalization_bound(model: &GroupModel, w: &Word) -> Result<AreaEstimate> {
    let owned;
    let raag = match (model.raag(), model.family()) {
        (Some(r), _) => r,
        (None, Family::FreeAbelian { rank }) => {
            let edges: Vec<(usize, usize)> = (0..*rank)
                .flat_map(|i| ((i + 1)..*rank).map(move |j| (i, j)))
                .collect();
            owned = Raag::new(*rank, &edges);
            &owned
        }
        _ => return Err(Error::Unsupported("not a right-angled Artin group".into())),
    };
    let (rest, swaps) = raag.reduce(&w.0);
    if !rest.is_empty() {
        return Err(Error::NotNullHomotopic);
    }
    Ok(AreaEstimate::upper_bound(swaps))
}

/// Routes to the best available oracle for the model.
pub fn area_dispatch(model: &GroupModel, w: &Word, cfg: &AreaConfig) -> Result<AreaEstimate> {
    let p = model.presentation();
    let bfs = |w: &Word| area_bfs_with_limit(p, w, cfg.slack, cfg.area_cap, cfg.max_states);
    match model.family() {
        Family::Free { .. } => {
            if w.free_reduce().is_empty() {
                Ok(AreaEstimate::exact(0))
            } else {
                Err(Error::NotNullHomotopic)
            }
        }
        Family::FreeAbelian { rank: 2 } => area_winding(w),
        Family::FreeAbelian { .. } | Family::Raag { .. } => {
            let bound = raag_normalization_bound(model, w)?;
            if w.len() <= cfg.bfs_threshold {
                combine(bound, bfs(w))
            } else {
                Ok(bound)
            }
        }
        Family::SmallCancellation => {
            let (trivial, bound) = dehn_greedy(model, w)?;
            if !trivial {
                return Err(Error::NotNullHomotopic);
            }
            if w.len() <= cfg.bfs_threshold {
                combine(bound, bfs(w))
            } else {
                Ok(bound)
            }
        }
        Family::GenericBudgeted { .. } => bfs(w),
    }
}

/// Minimum of an upper bound and a search result; the grade comes from the
/// search when it succeeded.
fn combine(bound: AreaEstimate, searched: Result<AreaEstimate>) -> Result<AreaEstimate> {
    match searched {
        Ok(s) => Ok(AreaEstimate {
            value: s.value.min(bound.value),
            grade: s.grade,
            budget: s.budget,
        }),
        Err(e) if e.is_budget() => Ok(bound),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::builtin;

    fn z2() -> Presentation {
        builtin("z2").unwrap()
    }

    fn w(p: &Presentation, s: &str) -> Word {
        p.parse_word(s).unwrap()
    }

    #[test]
    fn bfs_single_relator() {
        let p = z2();
        let a = area_bfs(&p, &w(&p, "abAB"), None, None).unwrap();
        assert_eq!(a.value, 1);
        assert_eq!(a.grade, AreaGrade::Exact);
    }

    #[test]
    fn bfs_two_cells() {
        let p = z2();
        assert_eq!(area_bfs(&p, &w(&p, "aabAAB"), None, None).unwrap().value, 2);
    }

    #[test]
    fn bfs_nontrivial_word_is_not_filled() {
        let p = z2();
        let err = area_bfs(&p, &w(&p, "ab"), Some(4), Some(6)).unwrap_err();
        assert!(matches!(err, Error::NotFilledWithinBudget { .. }));
    }

    #[test]
    fn winding_examples() {
        let p = z2();
        assert_eq!(area_winding(&w(&p, "abAB")).unwrap().value, 1);
        assert_eq!(area_winding(&w(&p, "aaabbbAAABBB")).unwrap().value, 9);
        assert_eq!(area_winding(&w(&p, "abABabAB")).unwrap().value, 2);
        assert_eq!(area_winding(&w(&p, "aA")).unwrap().value, 0);
        assert_eq!(area_winding(&w(&p, "ab")), Err(Error::NotNullHomotopic));
    }

    #[test]
    fn winding_agrees_with_search_on_small_squares() {
        let p = z2();
        for s in ["aabbAABB", "abABabAB", "abaBAbAB", "aabAABaB"] {
            let word = w(&p, s);
            if area_winding(&word).is_err() {
                continue;
            }
            assert_eq!(
                area_winding(&word).unwrap().value,
                area_bfs(&p, &word, None, None).unwrap().value,
                "{s}"
            );
        }
    }

    #[test]
    fn dehn_greedy_examples() {
        let m = GroupModel::builtin("genus2").unwrap();
        let r = m.parse_word("abABcdCD").unwrap();
        assert_eq!(dehn_greedy(&m, &r).unwrap(), (true, AreaEstimate::upper_bound(1)));
        assert!(!dehn_greedy(&m, &m.parse_word("abAB").unwrap()).unwrap().0);
        assert_eq!(dehn_greedy(&m, &Word::empty()).unwrap(), (true, AreaEstimate::upper_bound(0)));
    }

    #[test]
    fn genus_two_commutator_is_not_filled() {
        let m = GroupModel::builtin("genus2").unwrap();
        let word = m.parse_word("abAB").unwrap();
        assert!(area_bfs(m.presentation(), &word, Some(4), Some(4)).is_err());
        assert!(!m.is_identity(&word).unwrap());
    }

    #[test]
    fn raag_bound_examples() {
        let m = GroupModel::builtin("raag-p3").unwrap();
        let bound = raag_normalization_bound(&m, &m.parse_word("abAB").unwrap()).unwrap();
        assert_eq!(bound.value, 1);
        assert_eq!(bound.grade, AreaGrade::UpperBound);
        assert_eq!(
            raag_normalization_bound(&m, &m.parse_word("acAC").unwrap()),
            Err(Error::NotNullHomotopic)
        );
        assert_eq!(raag_normalization_bound(&m, &Word::empty()).unwrap().value, 0);
    }

    #[test]
    fn dispatch_routes() {
        let cfg = AreaConfig::default();
        let f2 = GroupModel::builtin("f2").unwrap();
        assert_eq!(area_dispatch(&f2, &f2.parse_word("abBA").unwrap(), &cfg).unwrap(), AreaEstimate::exact(0));
        let z2 = GroupModel::builtin("z2").unwrap();
        assert_eq!(area_dispatch(&z2, &z2.parse_word("abAB").unwrap(), &cfg).unwrap(), AreaEstimate::exact(1));
    }

    #[test]
    fn dispatch_raag_takes_minimum_with_search_grade() {
        let m = GroupModel::builtin("raag-p3").unwrap();
        let word = m.parse_word("abcBACbB").unwrap().free_reduce();
        let word = if m.is_identity(&word).unwrap() { word } else { m.parse_word("abcABC").unwrap() };
        let word = if m.is_identity(&word).unwrap() { word } else { m.parse_word("acbCAB").unwrap() };
        assert!(m.is_identity(&word).unwrap());
        let bound = raag_normalization_bound(&m, &word).unwrap();
        let exact = area_bfs(m.presentation(), &word, None, None).unwrap();
        let got = area_dispatch(&m, &word, &AreaConfig::default()).unwrap();
        assert_eq!(got.value, bound.value.min(exact.value));
        assert_eq!(got.grade, exact.grade);
    }

    #[test]
    fn least_rotation_is_minimal() {
        assert_eq!(least_rotation(&[2, 0, 1, 0, 0]), vec![0, 0, 2, 0, 1]);
        assert_eq!(least_rotation(&[]), Vec::<u8>::new());
    }
}
