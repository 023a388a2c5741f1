use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Class;

/// Counts indexed `[gold][predicted]`, class order CAG/NAG/OAG.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix(pub [[usize; 3]; 3]);

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    pub fn support(&self, c: Class) -> usize {
        self.0[c.index()].iter().sum()
    }

    pub fn predicted(&self, c: Class) -> usize {
        self.0.iter().map(|row| row[c.index()]).sum()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.0[i][i]).sum()
    }

    pub fn class_metrics(&self, c: Class) -> ClassMetrics {
        let tp = self.0[c.index()][c.index()] as f64;
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        let precision = ratio(tp, self.predicted(c));
        let recall = ratio(tp, self.support(c));
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support: self.support(c),
        }
    }

    /// Support-weighted mean of per-class F1; 0 for an empty matrix.
    pub fn weighted_f1(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        Class::ALL
            .iter()
            .map(|&c| self.support(c) as f64 * self.class_metrics(c).f1)
            .sum::<f64>()
            / total as f64
    }
}

fn check_lengths(gold: &[Class], pred: &[Class]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::InvalidInput(format!(
            "{} gold labels but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    Ok(())
}

pub fn confusion_matrix(gold: &[Class], pred: &[Class]) -> Result<ConfusionMatrix> {
    check_lengths(gold, pred)?;
    let mut m = ConfusionMatrix::default();
    for (g, p) in gold.iter().zip(pred) {
        m.0[g.index()][p.index()] += 1;
    }
    Ok(m)
}

pub fn weighted_f1(gold: &[Class], pred: &[Class]) -> Result<f64> {
    Ok(confusion_matrix(gold, pred)?.weighted_f1())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: usize,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub class_order: Vec<String>,
    /// Rows are gold classes, columns predictions.
    pub confusion: ConfusionMatrix,
    pub per_class: BTreeMap<String, ClassMetrics>,
}

impl EvalReport {
    pub fn new(gold: &[Class], pred: &[Class]) -> Result<Self> {
        let confusion = confusion_matrix(gold, pred)?;
        let examples = confusion.total();
        Ok(Self {
            examples,
            accuracy: if examples == 0 {
                0.0
            } else {
                confusion.correct() as f64 / examples as f64
            },
            weighted_f1: confusion.weighted_f1(),
            class_order: Class::ALL.iter().map(|c| c.as_str().to_string()).collect(),
            per_class: Class::ALL
                .iter()
                .map(|&c| (c.as_str().to_string(), confusion.class_metrics(c)))
                .collect(),
            confusion,
        })
    }

    /// TOML rendering, suitable for `eval --report`.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("cannot serialise report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Class::{Cag as C, Nag as N, Oag as O};

    #[test]
    fn six_example_case() {
        let gold = [N, N, N, C, C, O];
        let pred = [N, N, C, C, O, O];
        let m = confusion_matrix(&gold, &pred).unwrap();
        assert_eq!(m.0, [[1, 0, 1], [1, 2, 0], [0, 0, 1]]);
        let f1 = weighted_f1(&gold, &pred).unwrap();
        assert!((f1 - 0.6778).abs() < 1e-4, "{f1}");
    }

    #[test]
    fn constant_prediction_on_uniform_gold() {
        let gold = [C, N, O];
        let f1 = weighted_f1(&gold, &[N, N, N]).unwrap();
        assert!((f1 - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_degenerate() {
        let gold = [C, O, O, N];
        assert_eq!(weighted_f1(&gold, &gold).unwrap(), 1.0);
        assert_eq!(confusion_matrix(&[C], &[N]).unwrap().0[0][1], 1);
        assert!(matches!(confusion_matrix(&[C], &[]), Err(Error::InvalidInput(_))));
        assert_eq!(weighted_f1(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn report_round_trips_through_toml() {
        let r = EvalReport::new(&[N, N, C], &[N, C, C]).unwrap();
        let text = r.to_toml().unwrap();
        assert!(text.contains("weighted_f1"));
        let back: EvalReport = toml::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
