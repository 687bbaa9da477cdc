//! Freely reduced words over an abstract generating set.

/// A word is a sequence of syllables `(generator index, exponent)`, kept
/// freely reduced: no zero exponents and no two adjacent syllables on the
/// same generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    syllables: Vec<(usize, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(gen: usize) -> Self {
        Word { syllables: vec![(gen, 1)] }
    }

    pub fn from_syllables(sylls: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut w = Word::default();
        for (g, e) in sylls {
            w.push(g, e);
        }
        w
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Append `gen^exp`, merging and cancelling with the current tail.
    pub fn push(&mut self, gen: usize, exp: i64) {
        if exp == 0 {
            return;
        }
        if let Some(last) = self.syllables.last_mut() {
            if last.0 == gen {
                last.1 += exp;
                if last.1 == 0 {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push((gen, exp));
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(g, e) in &other.syllables {
            w.push(g, e);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..k.abs() {
            w = w.concat(&base);
        }
        w
    }

    /// Conjugate `self^by = by^-1 * self * by`.
    pub fn conjugate(&self, by: &Word) -> Word {
        by.inverse().concat(self).concat(by)
    }

    /// The image of the word under the free-group automorphism inverting
    /// every generator (each letter `g^e` becomes `g^-e` in place).
    pub fn invert_generators(&self) -> Word {
        Word::from_syllables(self.syllables.iter().map(|&(g, e)| (g, -e)))
    }

    /// Flatten to single letters: positive entry `g` or inverse marker.
    /// Returns pairs `(gen, positive)`.
    pub fn letters(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for &(g, e) in &self.syllables {
            for _ in 0..e.abs() {
                out.push((g, e > 0));
            }
        }
        out
    }

    pub fn letter_len(&self) -> usize {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        let mut w = Word::identity();
        w.push(0, 2);
        w.push(0, -2);
        assert!(w.is_identity());
        w.push(1, 3);
        w.push(1, -1);
        assert_eq!(w.syllables(), &[(1, 2)]);
    }

    #[test]
    fn inverse_concat_cancels() {
        let w = Word::from_syllables([(0, 2), (1, -1), (2, 3)]);
        assert!(w.concat(&w.inverse()).is_identity());
    }

    #[test]
    fn conjugation_shape() {
        let x = Word::generator(0);
        let y = Word::generator(1);
        let c = x.conjugate(&y);
        assert_eq!(c.syllables(), &[(1, -1), (0, 1), (1, 1)]);
    }
}
