//! Word problem and shortlex geodesics for `C'(1/6)` presentations.
//!
//! Dehn's algorithm removes every subword that is more than half of a
//! relator. Two Dehn-reduced words for the same element bound a disc
//! diagram made of single-row ladders of cells, so any remaining shortening
//! (or shortlex improvement) is realized by replacing the top of one ladder
//! with its bottom. [`SmallCancellation::normal_form`] alternates the two
//! rewrites until neither applies.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use crate::presentation::Presentation;
use crate::word::{push_reduced, Letter, Word};

#[derive(Clone, Debug)]
pub struct SmallCancellation {
    /// Cyclic shifts of relators and their inverses.
    cells: Vec<Vec<Letter>>,
    /// Cells indexed by their first letter's rank.
    by_first: Vec<Vec<usize>>,
    /// Subwords longer than half a relator, mapped to their shorter
    /// complement.
    long_pieces: FxHashMap<Vec<Letter>, Vec<Letter>>,
    long_lengths: Vec<usize>,
    max_piece: usize,
    rank: usize,
}

/// Ladder state: the shared edge entering the next cell.
type Edge = Vec<Letter>;

impl SmallCancellation {
    pub fn new(p: &Presentation) -> Self {
        let rank = p.rank();
        let cells: Vec<Vec<Letter>> = p.symmetrized_relators().into_iter().map(|w| w.0).collect();
        let mut by_first = vec![Vec::new(); 2 * rank];
        for (i, c) in cells.iter().enumerate() {
            by_first[c[0].rank(rank)].push(i);
        }
        let mut long_pieces = FxHashMap::default();
        let mut long_lengths = Vec::new();
        for c in &cells {
            let n = c.len();
            for m in (n / 2 + 1)..=n {
                let rest: Word = Word(c[m..].to_vec());
                long_pieces.entry(c[..m].to_vec()).or_insert_with(|| rest.invert().0);
                if !long_lengths.contains(&m) {
                    long_lengths.push(m);
                }
            }
        }
        long_lengths.sort_unstable_by(|a, b| b.cmp(a));
        let max_piece = p.check_small_cancellation(1, 6).max_piece.max(1);
        SmallCancellation {
            cells,
            by_first,
            long_pieces,
            long_lengths,
            max_piece,
            rank,
        }
    }

    /// Dehn's algorithm. Returns the Dehn-reduced word and the number of
    /// relator replacements performed.
    pub fn dehn_reduce(&self, letters: &[Letter]) -> (Vec<Letter>, usize) {
        let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
        let mut pending: Vec<Letter> = letters.iter().rev().copied().collect();
        let mut count = 0;
        while let Some(l) = pending.pop() {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
                continue;
            }
            stack.push(l);
            for &m in &self.long_lengths {
                if stack.len() < m {
                    continue;
                }
                let start = stack.len() - m;
                if let Some(rep) = self.long_pieces.get(&stack[start..]) {
                    stack.truncate(start);
                    pending.extend(rep.iter().rev());
                    count += 1;
                    break;
                }
            }
        }
        (stack, count)
    }

    pub fn is_identity(&self, letters: &[Letter]) -> bool {
        self.dehn_reduce(letters).0.is_empty()
    }

    /// Shortlex-least geodesic representative.
    pub fn normal_form(&self, letters: &[Letter]) -> Vec<Letter> {
        let (mut w, _) = self.dehn_reduce(letters);
        while let Some((s, t, bottom)) = self.find_improving_ladder(&w) {
            let mut next = Vec::with_capacity(w.len());
            for &l in w[..s].iter().chain(&bottom).chain(&w[t..]) {
                push_reduced(&mut next, l);
            }
            w = self.dehn_reduce(&next).0;
        }
        w
    }

    /// Leftmost ladder whose bottom is shortlex-smaller than its top.
    fn find_improving_ladder(&self, w: &[Letter]) -> Option<(usize, usize, Vec<Letter>)> {
        for s in 0..w.len() {
            let mut best: Option<(usize, Vec<Letter>)> = None;
            for (t, bottom) in self.ladders_from(w, s) {
                let top = &w[s..t];
                let improves = bottom.len() < top.len()
                    || (bottom.len() == top.len() && bottom.as_slice() < top);
                if !improves {
                    continue;
                }
                // Prefer the largest shortening, then the smaller result.
                let gain = |t: usize, b: &Vec<Letter>| (t - s) as isize - b.len() as isize;
                let better = match &best {
                    None => true,
                    Some((bt, bb)) => {
                        let (g_new, g_old) = (gain(t, &bottom), gain(*bt, bb));
                        g_new > g_old || (g_new == g_old && t < *bt)
                    }
                };
                if better {
                    best = Some((t, bottom));
                }
            }
            if let Some((t, b)) = best {
                return Some((s, t, b));
            }
        }
        None
    }

    /// Every ladder whose top starts at `s`, as (end of top, best bottom).
    /// For each end only the shortlex-least bottom is kept.
    fn ladders_from(&self, w: &[Letter], s: usize) -> Vec<(usize, Vec<Letter>)> {
        // states[pos] : shared edge -> best bottom so far
        let mut states: BTreeMap<usize, FxHashMap<Edge, Vec<Letter>>> = BTreeMap::new();
        states.entry(s).or_default().insert(Vec::new(), Vec::new());
        let mut finished: FxHashMap<usize, Vec<Letter>> = FxHashMap::default();
        while let Some((pos, current)) = states.pop_first() {
            let mut entries: Vec<(Edge, Vec<Letter>)> = current.into_iter().collect();
            entries.sort();
            for (edge_in, bottom) in entries {
                let first = pos == s;
                if !first && edge_in.is_empty() {
                    continue;
                }
                let edge_back: Vec<Letter> = edge_in.iter().rev().map(|l| l.inverse()).collect();
                for &ci in &self.by_first[w[pos].rank(self.rank)] {
                    let cell = &self.cells[ci];
                    let n = cell.len();
                    if !cell.ends_with(&edge_back) || edge_back.len() >= n {
                        continue;
                    }
                    let avail = n - edge_back.len();
                    // top part p = cell[..plen] must match w
                    let mut plen = 0;
                    while plen < avail && pos + plen < w.len() && cell[plen] == w[pos + plen] {
                        plen += 1;
                        let middle = &cell[plen..avail];
                        let end = pos + plen;
                        // e_out = middle[..k], bottom piece q = inverse(middle[k..])
                        for k in 0..=middle.len().min(self.max_piece) {
                            let q: Vec<Letter> = middle[k..].iter().rev().map(|l| l.inverse()).collect();
                            let mut nb = bottom.clone();
                            nb.extend_from_slice(&q);
                            if k == 0 {
                                let slot = finished.entry(end).or_insert_with(|| nb.clone());
                                if shortlex_less(&nb, slot) {
                                    *slot = nb;
                                }
                            } else if end < w.len() {
                                let e = middle[..k].to_vec();
                                let slot = states.entry(end).or_default().entry(e).or_insert_with(|| nb.clone());
                                if shortlex_less(&nb, slot) {
                                    *slot = nb;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut out: Vec<(usize, Vec<Letter>)> = finished.into_iter().collect();
        out.sort();
        out
    }
}

fn shortlex_less(a: &[Letter], b: &[Letter]) -> bool {
    a.len() < b.len() || (a.len() == b.len() && a < b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::builtin;
    use crate::word::parse_word;

    fn g2() -> (SmallCancellation, Vec<char>) {
        let p = builtin("genus2").unwrap();
        (SmallCancellation::new(&p), p.generators)
    }

    #[test]
    fn dehn_removes_whole_relator() {
        let (sc, g) = g2();
        let (w, n) = sc.dehn_reduce(&parse_word("abABcdCD", &g).unwrap().0);
        assert!(w.is_empty());
        assert_eq!(n, 1);
    }

    #[test]
    fn dehn_keeps_commutator() {
        let (sc, g) = g2();
        let w = parse_word("abAB", &g).unwrap().0;
        assert_eq!(sc.dehn_reduce(&w).0, w);
        assert!(!sc.is_identity(&w));
    }

    #[test]
    fn more_than_half_is_shortened() {
        let (sc, g) = g2();
        // abABc = dcDCc = dcD
        let w = parse_word("abABc", &g).unwrap().0;
        let nf = sc.normal_form(&w);
        assert_eq!(Word(nf).to_text(&g), "dcD");
    }

    #[test]
    fn half_relator_prefers_smaller_side() {
        let (sc, g) = g2();
        // cdCD = baBA; the ladder swap picks the shortlex-smaller half.
        let nf = sc.normal_form(&parse_word("cdCD", &g).unwrap().0);
        assert_eq!(Word(nf).to_text(&g), "baBA");
        let nf = sc.normal_form(&parse_word("baBA", &g).unwrap().0);
        assert_eq!(Word(nf).to_text(&g), "baBA");
    }
}
