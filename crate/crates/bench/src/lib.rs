//! Fixtures shared by the benchmarks.

use randdehn_core::filling::fill_word;
use randdehn_core::{Chain, Combing, GroupModel, NormalForm, Word};

pub fn model(name: &str) -> GroupModel {
    GroupModel::builtin(name).expect("builtin group")
}

/// Boundary word of one simple random walk trajectory with `n` steps.
pub fn boundary_word(model: &GroupModel, n: usize, seed: u64) -> Word {
    let path = Chain::srw(model)
        .sample_path(&NormalForm::identity(), n, seed, 0)
        .expect("sampling");
    fill_word(&Combing::native(model), &path).expect("boundary word")
}

/// Concatenated steps of one simple random walk trajectory.
pub fn walk_word(model: &GroupModel, n: usize, seed: u64) -> Word {
    let path = Chain::srw(model)
        .sample_path(&NormalForm::identity(), n, seed, 0)
        .expect("sampling");
    path.steps.iter().flat_map(|s| s.letters().iter().copied()).collect()
}

/// `a^k b^k a^-k b^-k` in a two-generator group.
pub fn commutator_square(model: &GroupModel, k: usize) -> Word {
    let text = ["a", "b", "A", "B"].map(|s| s.repeat(k)).concat();
    model.parse_word(&text).expect("word")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_null_homotopic() {
        for name in ["z2", "raag-p3", "genus2"] {
            let m = model(name);
            assert!(m.is_identity(&boundary_word(&m, 64, 1)).unwrap());
        }
        assert_eq!(walk_word(&model("f2"), 50, 1).len(), 50);
        let z2 = model("z2");
        let w = commutator_square(&z2, 3);
        assert_eq!(w.len(), 12);
        assert!(z2.is_identity(&w).unwrap());
    }
}
