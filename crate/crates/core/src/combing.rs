//! Combings: a chosen word per group element, and exhaustive checks that
//! those words are quasi-geodesic.

use std::sync::RwLock;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroupModel, NormalForm};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CombingKind {
    /// The model's own normal form.
    Native,
    /// Shortlex-least geodesic, for elements of length at most the budget.
    ShortlexBfs { radius_budget: usize },
}

/// Lines for elements longer than this are not memoized.
const MEMO_MAX_LEN: usize = 16;

pub struct Combing<'m> {
    model: &'m GroupModel,
    kind: CombingKind,
    memo: RwLock<FxHashMap<NormalForm, Word>>,
}

impl<'m> Combing<'m> {
    pub fn new(model: &'m GroupModel, kind: CombingKind) -> Self {
        Combing {
            model,
            kind,
            memo: RwLock::new(FxHashMap::default()),
        }
    }

    pub fn native(model: &'m GroupModel) -> Self {
        Combing::new(model, CombingKind::Native)
    }

    pub fn model(&self) -> &'m GroupModel {
        self.model
    }

    pub fn kind(&self) -> CombingKind {
        self.kind
    }

    /// The combing line of `g`, a word evaluating to `g`.
    pub fn line(&self, g: &NormalForm) -> Result<Word> {
        if g.is_identity() {
            return Ok(Word::empty());
        }
        let small = g.len() <= MEMO_MAX_LEN;
        if small {
            if let Some(w) = self.memo.read().expect("memo lock").get(g) {
                return Ok(w.clone());
            }
        }
        let w = match self.kind {
            CombingKind::Native => g.word().clone(),
            CombingKind::ShortlexBfs { radius_budget } => {
                if g.len() > radius_budget {
                    return Err(Error::BudgetExceeded(format!(
                        "element of length {} beyond combing radius {radius_budget}",
                        g.len()
                    )));
                }
                self.model.geodesic_representative(g)?
            }
        };
        if small {
            self.memo.write().expect("memo lock").insert(g.clone(), w.clone());
        }
        Ok(w)
    }

    /// Line of the word's element.
    pub fn line_of(&self, w: &Word) -> Result<Word> {
        self.line(&self.model.evaluate(w)?)
    }

    /// Two-endpoint line from `x` to `y`: the line of `x^-1 y`, read from
    /// basepoint `x`.
    pub fn line_between(&self, x: &NormalForm, y: &NormalForm) -> Result<Word> {
        self.line(&self.model.multiply(&self.model.inverse(x)?, y)?)
    }

    /// Discrete arc length between points `i <= j` of `line(g)`.
    pub fn arc_length_between(&self, g: &NormalForm, i: usize, j: usize) -> Result<usize> {
        let len = self.line(g)?.len();
        if i > j || j > len {
            return Err(Error::IndexOutOfRange { i, j, len });
        }
        Ok(j - i)
    }

    /// Smallest `D` (in steps of 1/8, at least 1) such that every line of an
    /// element of the radius-`radius` ball satisfies
    /// `|i - j| / D - D <= d(p_i, p_j)` for all pairs of its points.
    pub fn verify_quasigeodesic(&self, radius: usize) -> Result<QGCertificate> {
        let ball = self.model.ball(radius)?;
        let mut eighths = 8u64;
        let mut worst: Option<Offender> = None;
        let mut geodesic = true;
        for entry in ball.entries() {
            let line = self.line(&entry.element)?;
            if self.model.evaluate(&line)? != entry.element {
                return Err(Error::InvalidInput(format!(
                    "combing line {} does not evaluate to its element",
                    self.model.format_word(&line)
                )));
            }
            for i in 0..line.len() {
                let mut r = self.model.reducer();
                for j in (i + 1)..=line.len() {
                    r.push_back(line.0[j - 1]);
                    let dist = r.len()? as u64;
                    let arc = (j - i) as u64;
                    if dist != arc {
                        geodesic = false;
                    }
                    let need = min_eighths(arc, dist);
                    if need > eighths || (worst.is_none() && need > 8) {
                        eighths = eighths.max(need);
                        worst = Some(Offender {
                            element: self.model.format_word(entry.element.word()),
                            i,
                            j,
                            arc: arc as usize,
                            distance: dist as usize,
                        });
                    }
                }
            }
        }
        Ok(QGCertificate {
            d: eighths as f64 / 8.0,
            d_eighths: eighths,
            radius,
            elements_checked: ball.len(),
            geodesic,
            worst,
        })
    }
}

/// Least `k >= 8` with `arc / (k/8) - k/8 <= dist`, i.e.
/// `64 arc <= k^2 + 8 k dist`.
fn min_eighths(arc: u64, dist: u64) -> u64 {
    let mut k = 8;
    while 64 * arc > k * k + 8 * k * dist {
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub element: String,
    pub i: usize,
    pub j: usize,
    pub arc: usize,
    pub distance: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QGCertificate {
    pub d: f64,
    pub d_eighths: u64,
    pub radius: usize,
    pub elements_checked: usize,
    /// Every checked line is a geodesic.
    pub geodesic: bool,
    /// The pair forcing the reported `D`, when `D > 1`.
    pub worst: Option<Offender>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_line_is_exponent_form() {
        let m = GroupModel::builtin("z2").unwrap();
        let c = Combing::native(&m);
        let g = m.evaluate(&m.parse_word("BaBbaa").unwrap()).unwrap();
        assert_eq!(m.format_word(&c.line(&g).unwrap()), "aaaB");
        let g = m.evaluate(&m.parse_word("aBa").unwrap()).unwrap();
        assert_eq!(m.format_word(&c.line(&g).unwrap()), "aaB");
    }

    #[test]
    fn free_line_is_reduced_word() {
        let m = GroupModel::builtin("f2").unwrap();
        let c = Combing::native(&m);
        let w = m.parse_word("abAAB").unwrap();
        assert_eq!(c.line_of(&w).unwrap(), w);
        assert!(c.line(&NormalForm::identity()).unwrap().is_empty());
    }

    #[test]
    fn shortlex_combing_respects_budget() {
        let m = GroupModel::builtin("z2").unwrap();
        let c = Combing::new(&m, CombingKind::ShortlexBfs { radius_budget: 2 });
        let g = m.evaluate(&m.parse_word("Baa").unwrap()).unwrap();
        assert!(c.line(&g).unwrap_err().is_budget());
        let g = m.evaluate(&m.parse_word("Ba").unwrap()).unwrap();
        assert_eq!(m.format_word(&c.line(&g).unwrap()), "aB");
    }

    #[test]
    fn arc_lengths() {
        let m = GroupModel::builtin("f2").unwrap();
        let c = Combing::native(&m);
        let g = m.evaluate(&m.parse_word("abbab").unwrap()).unwrap();
        assert_eq!(c.arc_length_between(&g, 2, 2).unwrap(), 0);
        assert_eq!(c.arc_length_between(&g, 1, 4).unwrap(), 3);
        assert_eq!(c.arc_length_between(&g, 0, 5).unwrap(), 5);
        assert_eq!(
            c.arc_length_between(&g, 3, 6),
            Err(Error::IndexOutOfRange { i: 3, j: 6, len: 5 })
        );
        assert!(c.arc_length_between(&g, 4, 3).is_err());
    }

    #[test]
    fn min_eighths_matches_real_bound() {
        for arc in 0..40u64 {
            for dist in 0..=arc {
                let k = min_eighths(arc, dist);
                let d = k as f64 / 8.0;
                assert!(arc as f64 / d - d <= dist as f64 + 1e-12);
                if k > 8 {
                    let d = (k - 1) as f64 / 8.0;
                    assert!(arc as f64 / d - d > dist as f64 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn a_detour_needs_larger_constant() {
        // arc 10 between points at distance 0 needs D^2 >= 10
        assert_eq!(min_eighths(10, 0), 26);
    }
}
