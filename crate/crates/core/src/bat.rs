//! Bat algorithm (Yang, 2010) under a maximization convention.
//!
//! Every iteration first builds one candidate per bat against the best
//! position known at the start of the iteration, then evaluates all
//! candidates, then runs the acceptance step in bat order. Bat `i` draws all
//! of its randomness from stream `i` of the seed family (see [`crate::rng`]),
//! in this order per iteration: frequency `beta`, pulse test, `eps` per
//! dimension (local walk only), loudness test.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::rng::Stream;
use crate::threshold::{otsu_fitness, position_to_threshold};

#[derive(Debug, Clone, PartialEq)]
pub struct BatParams {
    pub population: usize,
    pub iterations: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Loudness decay factor.
    pub alpha: f64,
    /// Pulse-rate growth rate.
    pub gamma: f64,
    pub loudness0: f64,
    pub pulse_rate0: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub seed: u64,
}

impl Default for BatParams {
    /// One-dimensional search over the 8-bit intensity range.
    fn default() -> Self {
        BatParams {
            population: 20,
            iterations: 500,
            f_min: 0.0,
            f_max: 2.0,
            alpha: 0.9,
            gamma: 0.9,
            loudness0: 1.0,
            pulse_rate0: 0.5,
            lower: vec![0.0],
            upper: vec![255.0],
            seed: 1,
        }
    }
}

impl BatParams {
    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.population < 2 {
            return bad(format!("population must be >= 2, got {}", self.population));
        }
        if self.iterations < 1 {
            return bad("iterations must be >= 1".into());
        }
        if !(self.f_min.is_finite() && self.f_max.is_finite() && self.f_min <= self.f_max) {
            return bad(format!(
                "need f_min <= f_max, got {} and {}",
                self.f_min, self.f_max
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        if !(self.loudness0 > 0.0 && self.loudness0.is_finite()) {
            return bad(format!(
                "initial loudness must be > 0, got {}",
                self.loudness0
            ));
        }
        if !(0.0..=1.0).contains(&self.pulse_rate0) {
            return bad(format!(
                "initial pulse rate must lie in [0,1], got {}",
                self.pulse_rate0
            ));
        }
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return bad("lower and upper bounds must be non-empty and equally long".into());
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u))
        {
            return bad("every lower bound must be below its upper bound".into());
        }
        Ok(())
    }

    fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    pub loudness: Vec<f64>,
    pub pulse_rate: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after each iteration.
    pub history: Vec<f64>,
}

/// Runs exactly `params.iterations` iterations and returns the final swarm.
///
/// `fitness` must be deterministic and finite on the search box.
pub fn bat_optimize<F>(params: &BatParams, fitness: F) -> Result<BatState>
where
    F: Fn(&[f64]) -> f64,
{
    params.validate()?;
    let n = params.population;
    let dims = params.dims();
    let mut streams: Vec<Stream> = (0..n)
        .map(|i| Stream::split(params.seed, i as u64))
        .collect();

    let positions: Vec<Vec<f64>> = streams
        .iter_mut()
        .map(|s| {
            (0..dims)
                .map(|d| s.uniform_in(params.lower[d], params.upper[d]))
                .collect()
        })
        .collect();
    let scores: Vec<f64> = positions.iter().map(|x| fitness(x)).collect();
    let mut best_idx = 0;
    for i in 1..n {
        if scores[i] > scores[best_idx] {
            best_idx = i;
        }
    }
    let mut state = BatState {
        best_position: positions[best_idx].clone(),
        best_fitness: scores[best_idx],
        positions,
        velocities: vec![vec![0.0; dims]; n],
        fitness: scores,
        loudness: vec![params.loudness0; n],
        pulse_rate: vec![params.pulse_rate0; n],
        history: Vec::with_capacity(params.iterations),
    };

    for t in 1..=params.iterations {
        let leader = state.best_position.clone();
        let mean_loudness = state.loudness.iter().sum::<f64>() / n as f64;

        let mut candidates = Vec::with_capacity(n);
        for (i, rng) in streams.iter_mut().enumerate() {
            let beta = rng.uniform();
            let freq = params.f_min + (params.f_max - params.f_min) * beta;
            let v = &mut state.velocities[i];
            for d in 0..dims {
                v[d] += (state.positions[i][d] - leader[d]) * freq;
            }
            let mut cand: Vec<f64> = state.positions[i]
                .iter()
                .zip(v.iter())
                .map(|(x, v)| x + v)
                .collect();
            if rng.uniform() > state.pulse_rate[i] {
                for (c, l) in cand.iter_mut().zip(&leader) {
                    *c = l + rng.uniform_in(-1.0, 1.0) * mean_loudness;
                }
            }
            params.clamp(&mut cand);
            candidates.push(cand);
        }

        let scores: Vec<f64> = candidates.iter().map(|c| fitness(c)).collect();

        for (i, (cand, score)) in candidates.into_iter().zip(scores).enumerate() {
            let loud_draw = streams[i].uniform();
            if score > state.best_fitness {
                state.best_fitness = score;
                state.best_position = cand.clone();
            }
            if score > state.fitness[i] && loud_draw < state.loudness[i] {
                state.positions[i] = cand;
                state.fitness[i] = score;
                state.loudness[i] *= params.alpha;
                state.pulse_rate[i] = params.pulse_rate0 * (1.0 - (-params.gamma * t as f64).exp());
            }
        }
        state.history.push(state.best_fitness);
    }
    Ok(state)
}

/// Searches the 8-bit threshold maximizing Otsu between-class variance.
/// Returns `floor(best_position)` clamped to 0..=255.
pub fn optimize_threshold(image: &GrayImage, params: &BatParams) -> Result<(u8, BatState)> {
    if params.dims() != 1 {
        return Err(Error::InvalidParameter(format!(
            "threshold search is one-dimensional, got {} dimensions",
            params.dims()
        )));
    }
    let state = bat_optimize(params, otsu_fitness(image))?;
    Ok((position_to_threshold(state.best_position[0]), state))
}

/// `iteration,best_fitness` rows, iterations numbered from 1.
pub fn convergence_csv(history: &[f64]) -> String {
    let mut out = String::from("iteration,best_fitness\n");
    for (i, v) in history.iter().enumerate() {
        out.push_str(&format!("{},{:.9e}\n", i + 1, v));
    }
    out
}

pub fn write_convergence_csv(state: &BatState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(convergence_csv(&state.history).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_1d(lo: f64, hi: f64, n: usize, t: usize, seed: u64) -> BatParams {
        BatParams {
            population: n,
            iterations: t,
            lower: vec![lo],
            upper: vec![hi],
            seed,
            ..BatParams::default()
        }
    }

    #[test]
    fn flat_landscape() {
        let s = bat_optimize(&params_1d(0.0, 10.0, 5, 30, 4), |_| 7.0).unwrap();
        assert_eq!(s.best_fitness, 7.0);
        assert_eq!(s.history.len(), 30);
        assert!(s.history.iter().all(|&h| h == 7.0));
    }

    #[test]
    fn deterministic() {
        let p = params_1d(-5.0, 5.0, 10, 50, 77);
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2);
        assert_eq!(bat_optimize(&p, f).unwrap(), bat_optimize(&p, f).unwrap());
    }

    #[test]
    fn rejects_bad_params() {
        let good = BatParams::default();
        assert!(good.validate().is_ok());
        for bad in [
            BatParams {
                population: 1,
                ..good.clone()
            },
            BatParams {
                iterations: 0,
                ..good.clone()
            },
            BatParams {
                f_min: 3.0,
                ..good.clone()
            },
            BatParams {
                alpha: 1.0,
                ..good.clone()
            },
            BatParams {
                gamma: 0.0,
                ..good.clone()
            },
            BatParams {
                loudness0: 0.0,
                ..good.clone()
            },
            BatParams {
                pulse_rate0: 1.5,
                ..good.clone()
            },
            BatParams {
                lower: vec![5.0],
                upper: vec![5.0],
                ..good.clone()
            },
            BatParams {
                lower: vec![0.0, 0.0],
                upper: vec![1.0],
                ..good.clone()
            },
        ] {
            assert!(bat_optimize(&bad, |_| 0.0).is_err());
        }
    }

    #[test]
    fn multi_dim_threshold_rejected() {
        let img = GrayImage::filled(4, 4, 1).unwrap();
        let p = BatParams {
            lower: vec![0.0, 0.0],
            upper: vec![255.0, 255.0],
            ..BatParams::default()
        };
        assert!(optimize_threshold(&img, &p).is_err());
    }

    #[test]
    fn constant_image_threshold() {
        let img = GrayImage::filled(8, 8, 40).unwrap();
        let p = BatParams {
            iterations: 20,
            ..BatParams::default()
        };
        let (_, s) = optimize_threshold(&img, &p).unwrap();
        assert_eq!(s.best_fitness, 0.0);
    }

    #[test]
    fn csv_format() {
        let csv = convergence_csv(&[1.0, 2.0, 2.0]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "iteration,best_fitness");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[3].starts_with("3,"));
    }
}
