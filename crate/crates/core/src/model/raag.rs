//! Right-angled Artin groups: commutation-aware reduction and the
//! left-greedy (lexicographic trace) normal form.

use std::collections::VecDeque;

use crate::word::Letter;

#[derive(Clone, Debug)]
pub struct Raag {
    rank: usize,
    commute: Vec<bool>,
}

impl Raag {
    pub fn new(rank: usize, edges: &[(usize, usize)]) -> Self {
        let mut commute = vec![false; rank * rank];
        for &(x, y) in edges {
            commute[x * rank + y] = true;
            commute[y * rank + x] = true;
        }
        Raag { rank, commute }
    }

    /// Generators `x != y` joined by an edge of the defining graph.
    #[inline]
    pub fn commutes(&self, x: usize, y: usize) -> bool {
        self.commute[x * self.rank + y]
    }

    /// Appends `x` to a reduced word. If `x` cancels against an `x^-1` it
    /// can be shuffled next to, that letter is removed and the number of
    /// letters it had to pass is returned.
    pub fn push_back(&self, word: &mut VecDeque<Letter>, x: Letter) -> usize {
        let g = x.generator();
        for (passed, idx) in (0..word.len()).rev().enumerate() {
            let y = word[idx];
            if y == x.inverse() {
                word.remove(idx);
                return passed;
            }
            if y.generator() == g || !self.commutes(g, y.generator()) {
                break;
            }
        }
        word.push_back(x);
        0
    }

    /// Mirror image of [`Raag::push_back`].
    pub fn push_front(&self, word: &mut VecDeque<Letter>, x: Letter) -> usize {
        let g = x.generator();
        for idx in 0..word.len() {
            let y = word[idx];
            if y == x.inverse() {
                word.remove(idx);
                return idx;
            }
            if y.generator() == g || !self.commutes(g, y.generator()) {
                break;
            }
        }
        word.push_front(x);
        0
    }

    /// Reduces a word to a geodesic one, also returning the number of
    /// commutation moves the cancellations needed.
    pub fn reduce(&self, letters: &[Letter]) -> (VecDeque<Letter>, usize) {
        let mut out = VecDeque::with_capacity(letters.len());
        let mut swaps = 0;
        for &l in letters {
            swaps += self.push_back(&mut out, l);
        }
        (out, swaps)
    }

    /// Lexicographically least word in the commutation class of a reduced
    /// word: repeatedly extract the smallest letter that can be shuffled to
    /// the front.
    pub fn lex_normal_form(&self, reduced: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
        let mut rest: Vec<Letter> = reduced.into_iter().collect();
        let mut out = Vec::with_capacity(rest.len());
        let mut seen = vec![false; self.rank];
        while !rest.is_empty() {
            seen.iter_mut().for_each(|s| *s = false);
            let mut seen_list: Vec<usize> = Vec::with_capacity(self.rank);
            let mut best: Option<(Letter, usize)> = None;
            for (idx, &l) in rest.iter().enumerate() {
                let g = l.generator();
                if !seen[g] {
                    let free = seen_list.iter().all(|&h| self.commutes(g, h));
                    if free && best.is_none_or(|(b, _)| l < b) {
                        best = Some((l, idx));
                    }
                    seen[g] = true;
                    seen_list.push(g);
                    if seen_list.len() == self.rank {
                        break;
                    }
                }
            }
            let (l, idx) = best.expect("first letter is always extractable");
            out.push(l);
            rest.remove(idx);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn p3() -> Raag {
        Raag::new(3, &[(0, 1), (1, 2)])
    }

    fn w(s: &str) -> Vec<Letter> {
        parse_word(s, &['a', 'b', 'c']).unwrap().0
    }

    fn txt(v: impl IntoIterator<Item = Letter>) -> String {
        crate::word::Word::from_letters(v).to_text(&['a', 'b', 'c'])
    }

    #[test]
    fn commutator_cancels_with_one_swap() {
        let (r, swaps) = p3().reduce(&w("abAB"));
        assert!(r.is_empty());
        assert_eq!(swaps, 1);
    }

    #[test]
    fn non_commuting_letters_block() {
        let r = p3();
        let (red, _) = r.reduce(&w("acA"));
        assert_eq!(txt(red.clone()), "acA");
        assert_eq!(txt(r.lex_normal_form(red)), "acA");
    }

    #[test]
    fn lex_form_moves_small_letters_forward() {
        let r = p3();
        assert_eq!(txt(r.lex_normal_form(w("ba"))), "ab");
        assert_eq!(txt(r.lex_normal_form(w("cb"))), "bc");
        assert_eq!(txt(r.lex_normal_form(w("ca"))), "ca");
        assert_eq!(txt(r.lex_normal_form(w("cab"))), "bca");
    }

    #[test]
    fn push_front_mirrors_push_back() {
        let r = p3();
        let mut d: VecDeque<Letter> = w("bca").into_iter().collect();
        assert_eq!(r.push_front(&mut d, Letter::inv(1)), 0);
        assert_eq!(txt(d.clone()), "ca");
        let mut d: VecDeque<Letter> = w("ac").into_iter().collect();
        r.push_front(&mut d, Letter::inv(2));
        assert_eq!(txt(d), "Cac");
    }
}
