use serde::{Deserialize, Serialize};

use super::CoreError;

/// Grid step used by the concavity certificate.
pub const CONCAVITY_GRID_STEP: f64 = 1e-3;

/// A distortion `h: [0, 1] -> [0, 1]` with `h(0) = 0` and `h(1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distortion {
    Identity,
    /// `h(t) = t^exponent`; concave for `exponent <= 1`.
    Power { exponent: f64 },
    /// `h(t) = min(t / (1 - alpha), 1)`, the distortion of ES at level alpha.
    EsTail { alpha: f64 },
    /// Piecewise-linear interpolation through `(t[i], h[i])`.
    Grid { t: Vec<f64>, h: Vec<f64> },
}

impl Distortion {
    pub fn sqrt() -> Self {
        Distortion::Power { exponent: 0.5 }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let bad = |msg: &str| Err(CoreError::InvalidDistortion(msg.to_string()));
        match self {
            Distortion::Identity => Ok(()),
            Distortion::Power { exponent } => {
                if exponent.is_finite() && *exponent > 0.0 {
                    Ok(())
                } else {
                    bad("power exponent must be positive and finite")
                }
            }
            Distortion::EsTail { alpha } => {
                if (0.0..1.0).contains(alpha) {
                    Ok(())
                } else {
                    bad("es_tail level must lie in [0, 1)")
                }
            }
            Distortion::Grid { t, h } => {
                if t.len() < 2 || t.len() != h.len() {
                    return bad("grid needs at least two points and matching lengths");
                }
                if t[0] != 0.0 || *t.last().unwrap() != 1.0 {
                    return bad("grid must start at t = 0 and end at t = 1");
                }
                if t.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("grid t-values must be strictly increasing");
                }
                if h[0] != 0.0 || *h.last().unwrap() != 1.0 {
                    return bad("grid requires h(0) = 0 and h(1) = 1");
                }
                if h.iter().any(|v| !v.is_finite()) || h.windows(2).any(|w| w[0] > w[1]) {
                    return bad("grid h-values must be finite and nondecreasing");
                }
                Ok(())
            }
        }
    }

    /// Evaluates `h(t)`, clamping `t` into `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Distortion::Identity => t,
            Distortion::Power { exponent } => t.powf(*exponent),
            Distortion::EsTail { alpha } => (t / (1.0 - alpha)).min(1.0),
            Distortion::Grid { t: ts, h } => interpolate(ts, h, t),
        }
    }

    /// Concavity certificate: slopes on a uniform grid of step 1e-3 (and at the
    /// knots of a user grid) must be nonincreasing.
    pub fn is_concave(&self) -> bool {
        let mut points: Vec<f64> = (0..=1000).map(|i| i as f64 * CONCAVITY_GRID_STEP).collect();
        if let Distortion::Grid { t, .. } = self {
            points.extend_from_slice(t);
            points.sort_by(f64::total_cmp);
            points.dedup();
        }
        slopes_nonincreasing(&points, |t| self.eval(t))
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Distortion::Identity => true,
            Distortion::Power { exponent } => *exponent == 1.0,
            Distortion::EsTail { alpha } => *alpha == 0.0,
            Distortion::Grid { t, h } => t.iter().zip(h).all(|(a, b)| a == b),
        }
    }
}

pub(crate) fn interpolate(ts: &[f64], hs: &[f64], t: f64) -> f64 {
    match ts.binary_search_by(|probe| probe.total_cmp(&t)) {
        Ok(i) => hs[i],
        Err(0) => hs[0],
        Err(i) if i >= ts.len() => hs[ts.len() - 1],
        Err(i) => {
            let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
            hs[i - 1] + w * (hs[i] - hs[i - 1])
        }
    }
}

pub(crate) fn slopes_nonincreasing(points: &[f64], h: impl Fn(f64) -> f64) -> bool {
    let values: Vec<f64> = points.iter().map(|&t| h(t)).collect();
    let slopes: Vec<f64> = points
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (v[1] - v[0]) / (t[1] - t[0]))
        .collect();
    slopes
        .windows(2)
        .all(|s| s[1] <= s[0] + 1e-9 * (1.0 + s[0].abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_endpoints() {
        for d in [
            Distortion::Identity,
            Distortion::sqrt(),
            Distortion::EsTail { alpha: 0.9 },
            Distortion::Grid {
                t: vec![0.0, 0.5, 1.0],
                h: vec![0.0, 0.8, 1.0],
            },
        ] {
            d.validate().unwrap();
            assert_eq!(d.eval(0.0), 0.0);
            assert_eq!(d.eval(1.0), 1.0);
            assert!(d.is_concave(), "{d:?}");
        }
        assert_eq!(Distortion::EsTail { alpha: 0.5 }.eval(0.25), 0.5);
        let g = Distortion::Grid {
            t: vec![0.0, 0.5, 1.0],
            h: vec![0.0, 0.8, 1.0],
        };
        assert!((g.eval(0.25) - 0.4).abs() < 1e-15);
        assert!((g.eval(0.75) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn convex_distortions_are_flagged() {
        assert!(!Distortion::Power { exponent: 2.0 }.is_concave());
        let g = Distortion::Grid {
            t: vec![0.0, 0.5, 1.0],
            h: vec![0.0, 0.2, 1.0],
        };
        assert!(!g.is_concave());
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let bad = [
            Distortion::Power { exponent: 0.0 },
            Distortion::EsTail { alpha: 1.0 },
            Distortion::Grid {
                t: vec![0.0, 1.0],
                h: vec![0.1, 1.0],
            },
            Distortion::Grid {
                t: vec![0.0, 0.5, 1.0],
                h: vec![0.0, 0.9, 0.8],
            },
            Distortion::Grid {
                t: vec![0.0, 0.6, 0.6, 1.0],
                h: vec![0.0, 0.5, 0.5, 1.0],
            },
        ];
        for d in bad {
            assert!(d.validate().is_err(), "{d:?}");
        }
    }
}
