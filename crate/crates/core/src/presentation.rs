//! Finite presentations `<S | R>`, the text file format and small
//! cancellation checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{parse_word, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub name: String,
    pub generators: Vec<char>,
    pub relators: Vec<Word>,
}

/// Outcome of a `C'(lambda)` test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallCancellationReport {
    pub holds: bool,
    pub max_piece: usize,
    /// A longest piece, if any exists.
    pub witness: Option<Word>,
}

impl Presentation {
    pub fn new(name: impl Into<String>, generators: Vec<char>, relators: Vec<Word>) -> Result<Self> {
        let name = name.into();
        for (i, g) in generators.iter().enumerate() {
            if !g.is_ascii_lowercase() {
                return Err(Error::InvalidPresentation(format!(
                    "generator symbol {g:?} must be a lowercase ASCII letter"
                )));
            }
            if generators[..i].contains(g) {
                return Err(Error::InvalidPresentation(format!("duplicate generator {g:?}")));
            }
        }
        if generators.is_empty() {
            return Err(Error::InvalidPresentation("no generators".into()));
        }
        if generators.len() > 26 {
            return Err(Error::InvalidPresentation("too many generators".into()));
        }
        let mut rels = Vec::with_capacity(relators.len());
        for r in relators {
            if r.0.iter().any(|l| l.generator() >= generators.len()) {
                return Err(Error::InvalidPresentation("relator uses an unknown generator".into()));
            }
            let r = r.free_reduce().cyclic_reduce();
            if r.is_empty() {
                return Err(Error::InvalidPresentation("relator reduces to the empty word".into()));
            }
            rels.push(r);
        }
        Ok(Presentation {
            name,
            generators,
            relators: rels,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        parse_word(text, &self.generators)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.to_text(&self.generators)
    }

    pub fn alphabet(&self) -> Vec<Letter> {
        Letter::alphabet(self.rank())
    }

    /// Parses the line-oriented presentation format:
    ///
    /// ```text
    /// # comment
    /// group z2
    /// gens a b
    /// rel abAB
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut gens: Option<Vec<char>> = None;
        let mut rel_texts = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or("");
            let rest: Vec<&str> = parts.collect();
            let bad = |msg: &str| Error::InvalidPresentation(format!("line {}: {msg}", lineno + 1));
            match key {
                "group" => {
                    if rest.len() != 1 {
                        return Err(bad("expected `group <name>`"));
                    }
                    name = Some(rest[0].to_string());
                }
                "gens" => {
                    let mut g = Vec::new();
                    for tok in rest {
                        let mut chars = tok.chars();
                        match (chars.next(), chars.next()) {
                            (Some(c), None) => g.push(c),
                            _ => return Err(bad("generator symbols are single letters")),
                        }
                    }
                    gens = Some(g);
                }
                "rel" => {
                    if rest.len() != 1 {
                        return Err(bad("expected `rel <word>`"));
                    }
                    rel_texts.push(rest[0].to_string());
                }
                other => return Err(bad(&format!("unknown directive {other:?}"))),
            }
        }
        let gens = gens.ok_or_else(|| Error::InvalidPresentation("missing `gens` line".into()))?;
        let rels = rel_texts
            .iter()
            .map(|t| parse_word(t, &gens))
            .collect::<Result<Vec<_>>>()?;
        Presentation::new(name.unwrap_or_else(|| "unnamed".into()), gens, rels)
    }

    /// Serializes back to the file format.
    pub fn to_text(&self) -> String {
        let mut s = format!("group {}\ngens", self.name);
        for g in &self.generators {
            s.push(' ');
            s.push(*g);
        }
        s.push('\n');
        for r in &self.relators {
            s.push_str("rel ");
            s.push_str(&self.format_word(r));
            s.push('\n');
        }
        s
    }

    /// All cyclic shifts of every relator and of its inverse, deduplicated,
    /// in a deterministic order.
    pub fn symmetrized_relators(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for r in &self.relators {
            for base in [r.clone(), r.invert()] {
                let n = base.len();
                for s in 0..n {
                    let shifted: Word = (0..n).map(|i| base.0[(s + i) % n]).collect();
                    if !out.contains(&shifted) {
                        out.push(shifted);
                    }
                }
            }
        }
        out
    }

    /// Checks the metric small cancellation condition `C'(num/den)`: every
    /// piece is strictly shorter than `num/den` times the length of each
    /// relator containing it.
    pub fn check_small_cancellation(&self, num: u32, den: u32) -> SmallCancellationReport {
        let sym = self.symmetrized_relators();
        let mut holds = true;
        let mut max_piece = 0;
        let mut witness = None;
        for (i, r1) in sym.iter().enumerate() {
            for r2 in &sym[i + 1..] {
                let p = r1.0.iter().zip(&r2.0).take_while(|(x, y)| x == y).count();
                if p == 0 {
                    continue;
                }
                if p > max_piece {
                    max_piece = p;
                    witness = Some(Word(r1.0[..p].to_vec()));
                }
                let shortest = r1.len().min(r2.len());
                if (p as u64) * (den as u64) >= (num as u64) * (shortest as u64) {
                    holds = false;
                }
            }
        }
        SmallCancellationReport {
            holds,
            max_piece,
            witness,
        }
    }

    /// True when every relator is a commutator `xyXY` of two distinct
    /// generators.
    pub fn commutator_graph(&self) -> Option<Vec<(usize, usize)>> {
        let mut edges = Vec::new();
        for r in &self.relators {
            let l = r.letters();
            if l.len() != 4 {
                return None;
            }
            let (x, y) = (l[0], l[1]);
            if x.generator() == y.generator() {
                return None;
            }
            let expected = [x, y, x.inverse(), y.inverse()];
            if l != expected {
                return None;
            }
            let e = (x.generator().min(y.generator()), x.generator().max(y.generator()));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
        Some(edges)
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["f2", "z2", "raag-p3", "genus2"];

/// The built-in presentations.
pub fn builtin(name: &str) -> Option<Presentation> {
    let text = match name {
        "f2" => "group f2\ngens a b\n",
        "z2" => "group z2\ngens a b\nrel abAB\n",
        "raag-p3" => "group raag-p3\ngens a b c\nrel abAB\nrel bcBC\n",
        "genus2" => "group genus2\ngens a b c d\nrel abABcdCD\n",
        _ => return None,
    };
    Some(Presentation::parse(text).expect("builtin presentations parse"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_format() {
        let p = Presentation::parse("# torus\ngroup z2\ngens a b\nrel abAB # commutator\n").unwrap();
        assert_eq!(p.name, "z2");
        assert_eq!(p.generators, vec!['a', 'b']);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.format_word(&p.relators[0]), "abAB");
        assert_eq!(Presentation::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Presentation::parse("gens a a\n").is_err());
        assert!(Presentation::parse("gens a b\nrel ax\n").is_err());
        assert!(Presentation::parse("group g\n").is_err());
        assert!(Presentation::parse("gens a b\nrel aA\n").is_err());
        assert!(Presentation::parse("gens a B\n").is_err());
        assert!(Presentation::parse("gens a\nfoo bar\n").is_err());
    }

    #[test]
    fn relators_are_cyclically_reduced_on_load() {
        let p = Presentation::parse("gens a b\nrel babaB\n").unwrap();
        assert_eq!(p.format_word(&p.relators[0]), "aba");
    }

    #[test]
    fn genus_two_is_c_prime_sixth() {
        let p = builtin("genus2").unwrap();
        let rep = p.check_small_cancellation(1, 6);
        assert!(rep.holds);
        assert_eq!(rep.max_piece, 1);
    }

    #[test]
    fn torus_is_not_c_prime_sixth() {
        let rep = builtin("z2").unwrap().check_small_cancellation(1, 6);
        assert!(!rep.holds);
        assert_eq!(rep.max_piece, 1);
    }

    #[test]
    fn free_presentation_vacuous() {
        let rep = builtin("f2").unwrap().check_small_cancellation(1, 6);
        assert!(rep.holds);
        assert_eq!(rep.max_piece, 0);
    }

    #[test]
    fn piece_enumeration_matches_brute_force() {
        // Brute force: every common subword of two distinct positions of the
        // cyclic relators (or inverses), compared letter by letter.
        for name in ["z2", "genus2", "raag-p3"] {
            let p = builtin(name).unwrap();
            let mut cyc: Vec<(usize, bool, Vec<Letter>)> = Vec::new();
            for (ri, r) in p.relators.iter().enumerate() {
                cyc.push((ri, false, r.0.clone()));
                cyc.push((ri, true, r.invert().0));
            }
            let mut best = 0;
            for (a, (ra, ia, wa)) in cyc.iter().enumerate() {
                for (b, (rb, ib, wb)) in cyc.iter().enumerate() {
                    for sa in 0..wa.len() {
                        for sb in 0..wb.len() {
                            if a == b && sa == sb {
                                continue;
                            }
                            // identical cyclic words at the same offset are the same relator
                            if ra == rb && ia == ib && sa == sb {
                                continue;
                            }
                            let mut k = 0;
                            while k < wa.len().min(wb.len())
                                && wa[(sa + k) % wa.len()] == wb[(sb + k) % wb.len()]
                            {
                                k += 1;
                            }
                            best = best.max(k);
                        }
                    }
                }
            }
            assert_eq!(p.check_small_cancellation(1, 6).max_piece, best, "{name}");
        }
    }

    #[test]
    fn commutator_graph_detection() {
        assert_eq!(builtin("raag-p3").unwrap().commutator_graph(), Some(vec![(0, 1), (1, 2)]));
        assert_eq!(builtin("genus2").unwrap().commutator_graph(), None);
        assert_eq!(builtin("f2").unwrap().commutator_graph(), Some(vec![]));
    }
}
