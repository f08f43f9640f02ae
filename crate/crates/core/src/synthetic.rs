//! Seeded synthetic cohorts with a planted latent factor.
//!
//! Each subject has a latent `g ~ N(0, 1)`. The score is `30 + 6g + noise`
//! and the age-like covariate correlates with `g` at `−signal_strength`.
//! ROI series follow a factor model: every planted edge `(i, j)` owns a
//! shared source added to both ROIs with amplitude `a(g)`, where
//! `a(g)² = 2·signal_strength·σ(1.7g)`. Planted-edge correlations therefore
//! rise with `g`; all other pairs only pick up shared sources through
//! planted neighbours, independent of the edge itself.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused only when std is linked
use num_traits::Float;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::connectivity::{edge_count, edge_pairs};
use crate::encoder::sigmoid;
use crate::rng::{derive_seed, seeded, standard_normal};
use crate::{Error, Matrix, Result};

const SCORE_MEAN: f64 = 30.0;
const SCORE_SCALE: f64 = 6.0;
const AGE_MEAN: f64 = 54.6;
const AGE_SD: f64 = 18.6;
const MIXING_GAIN: f64 = 2.0;
const MIXING_SLOPE: f64 = 1.7;
const MOTION_STEP_SD: f64 = 0.01;

const TAG_PLANTED: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub subjects: usize,
    pub rois: usize,
    pub timepoints: usize,
    pub planted_edges: usize,
    pub signal_strength: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            subjects: 200,
            rois: 20,
            timepoints: 150,
            planted_edges: 15,
            signal_strength: 0.6,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.subjects < 1 {
            return bad("subjects", "must be at least 1".into());
        }
        if self.rois < 2 {
            return bad("rois", format!("need at least 2, got {}", self.rois));
        }
        if self.timepoints < 3 {
            return bad(
                "timepoints",
                format!("need at least 3, got {}", self.timepoints),
            );
        }
        if self.planted_edges > edge_count(self.rois) {
            return bad(
                "planted_edges",
                format!(
                    "{} exceeds the {} available edges",
                    self.planted_edges,
                    edge_count(self.rois)
                ),
            );
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return bad(
                "signal_strength",
                format!("{} is outside [0, 1]", self.signal_strength),
            );
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(
                "noise_sd",
                format!("{} is not a finite nonnegative value", self.noise_sd),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSubject {
    pub id: String,
    /// T×N ROI series.
    pub series: Matrix,
    /// T×6 head-motion trace (mm, degrees).
    pub motion: Matrix,
    pub score: f64,
    pub age: f64,
    pub latent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCohort {
    pub spec: SynthSpec,
    pub subjects: Vec<SyntheticSubject>,
    /// Planted `(i, j)` pairs with `i < j`, in upper-triangle order.
    pub planted_edges: Vec<(usize, usize)>,
}

impl SyntheticCohort {
    pub fn scores(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.score).collect()
    }

    pub fn ages(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.age).collect()
    }

    pub fn latents(&self) -> Vec<f64> {
        self.subjects.iter().map(|s| s.latent).collect()
    }

    /// Positions of the planted edges in the upper-triangle edge vector.
    pub fn planted_edge_indices(&self) -> Vec<usize> {
        edge_pairs(self.spec.rois)
            .enumerate()
            .filter(|(_, p)| self.planted_edges.binary_search(p).is_ok())
            .map(|(k, _)| k)
            .collect()
    }
}

pub fn generate_cohort(spec: &SynthSpec) -> Result<SyntheticCohort> {
    spec.validate()?;
    let mut planted_idx = sample(
        &mut seeded(derive_seed(spec.seed, &[TAG_PLANTED])),
        edge_count(spec.rois),
        spec.planted_edges,
    )
    .into_vec();
    planted_idx.sort_unstable();
    let all: Vec<(usize, usize)> = edge_pairs(spec.rois).collect();
    let planted_edges: Vec<(usize, usize)> = planted_idx.iter().map(|&k| all[k]).collect();
    let width = crate::matrix::digits(spec.subjects);
    let subjects = (0..spec.subjects)
        .map(|s| generate_subject(spec, &planted_edges, s, format!("sub-{:0width$}", s + 1)))
        .collect();
    Ok(SyntheticCohort {
        spec: *spec,
        subjects,
        planted_edges,
    })
}

fn generate_subject(
    spec: &SynthSpec,
    planted: &[(usize, usize)],
    index: usize,
    id: String,
) -> SyntheticSubject {
    let mut rng = seeded(derive_seed(spec.seed, &[index as u64]));
    let s = spec.signal_strength;
    let g = standard_normal(&mut rng);
    let score = SCORE_MEAN + SCORE_SCALE * g + spec.noise_sd * standard_normal(&mut rng);
    let u = standard_normal(&mut rng);
    let age = AGE_MEAN + AGE_SD * (-s * g + (1.0 - s * s).max(0.0).sqrt() * u);
    let amplitude = (MIXING_GAIN * s * sigmoid(MIXING_SLOPE * g)).sqrt();

    let (t, n) = (spec.timepoints, spec.rois);
    let mut series = Matrix::from_fn(t, n, |_, _| standard_normal(&mut rng));
    for &(i, j) in planted {
        for r in 0..t {
            let z = amplitude * standard_normal(&mut rng);
            let row = series.row_mut(r);
            row[i] += z;
            row[j] += z;
        }
    }
    let mut motion = Matrix::zeros(t, 6);
    for r in 1..t {
        for c in 0..6 {
            let step = MOTION_STEP_SD * standard_normal(&mut rng);
            motion.set(r, c, motion.get(r - 1, c) + step);
        }
    }
    SyntheticSubject {
        id,
        series,
        motion,
        score,
        age,
        latent: g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shapes() {
        let spec = SynthSpec {
            subjects: 4,
            ..SynthSpec::default()
        };
        let c = generate_cohort(&spec).unwrap();
        assert_eq!(c.subjects.len(), 4);
        assert_eq!(
            (c.subjects[0].series.rows(), c.subjects[0].series.cols()),
            (150, 20)
        );
        assert_eq!(c.planted_edges.len(), 15);
        assert_eq!(c.planted_edge_indices().len(), 15);
        assert!(c.planted_edges.iter().all(|&(i, j)| i < j && j < 20));
        assert_eq!(c.subjects[0].id, "sub-001");
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec {
            subjects: 3,
            seed: 9,
            ..SynthSpec::default()
        };
        assert_eq!(
            generate_cohort(&spec).unwrap(),
            generate_cohort(&spec).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            SynthSpec {
                rois: 1,
                ..SynthSpec::default()
            },
            SynthSpec {
                planted_edges: 191,
                ..SynthSpec::default()
            },
            SynthSpec {
                signal_strength: 1.5,
                ..SynthSpec::default()
            },
            SynthSpec {
                noise_sd: -1.0,
                ..SynthSpec::default()
            },
        ] {
            assert!(generate_cohort(&spec).is_err());
        }
    }
}
