use crate::error::{Error, Result};
use crate::game::Tuple;

/// A deterministic strategy: for every player, a total map from question
/// indices to answer indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strategy {
    maps: Vec<Vec<usize>>,
}

impl Strategy {
    pub fn new(maps: Vec<Vec<usize>>) -> Self {
        Strategy { maps }
    }

    /// Every player answers `answer` on every question.
    pub fn constant(question_counts: &[usize], answer: usize) -> Self {
        Strategy {
            maps: question_counts.iter().map(|&n| vec![answer; n]).collect(),
        }
    }

    pub fn players(&self) -> usize {
        self.maps.len()
    }

    pub fn answer(&self, player: usize, question: usize) -> usize {
        self.maps[player][question]
    }

    pub fn map(&self, player: usize) -> &[usize] {
        &self.maps[player]
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    /// The answer tuple `alpha|_q`.
    pub fn respond(&self, q: &Tuple) -> Tuple {
        Tuple(
            q.0.iter()
                .enumerate()
                .map(|(i, &x)| self.maps[i][x])
                .collect(),
        )
    }

    /// Checks totality and label ranges against the given alphabet sizes.
    pub fn check(&self, question_counts: &[usize], answer_counts: &[usize]) -> Result<()> {
        if self.maps.len() != question_counts.len() {
            return Err(Error::InvalidStrategy {
                reason: format!(
                    "{} player maps for a {}-player game",
                    self.maps.len(),
                    question_counts.len()
                ),
            });
        }
        for (i, map) in self.maps.iter().enumerate() {
            if map.len() != question_counts[i] {
                return Err(Error::InvalidStrategy {
                    reason: format!(
                        "player {i} maps {} questions, alphabet has {}",
                        map.len(),
                        question_counts[i]
                    ),
                });
            }
            if let Some(&a) = map.iter().find(|&&a| a >= answer_counts[i]) {
                return Err(Error::InvalidStrategy {
                    reason: format!("player {i} answers {a}, alphabet has {}", answer_counts[i]),
                });
            }
        }
        Ok(())
    }
}
