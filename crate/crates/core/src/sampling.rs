//! Approximate k-clique counting by sampling the round-2 wedges of the exact
//! pipeline, either independently per pair or by per-owner node coloring.

use crate::error::{Error, Result};
use crate::exact::{self, PairSelector, Round3Mode};
use crate::graph::{Graph, NodeId, Rank};
use crate::mix;
use crate::mrengine::{Engine, RunReport};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingMode {
    /// Keep each wedge independently with probability `p`.
    Plain { p: f64 },
    /// Color every high-neighborhood with `c` colors and keep monochromatic wedges.
    Color { c: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn plain(p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(format!("sampling probability {p} outside (0, 1]")));
        }
        Ok(SamplingConfig {
            mode: SamplingMode::Plain { p },
            seed,
        })
    }

    pub fn color(c: u32, seed: u64) -> Result<Self> {
        if c == 0 {
            return Err(Error::invalid("color count must be at least 1"));
        }
        Ok(SamplingConfig {
            mode: SamplingMode::Color { c },
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            SamplingMode::Plain { p } => Self::plain(p, self.seed).map(|_| ()),
            SamplingMode::Color { c } => Self::color(c, self.seed).map(|_| ()),
        }
    }

    /// Inverse probability that a given k-clique survives sampling.
    pub fn scale(&self, k: usize) -> f64 {
        match self.mode {
            SamplingMode::Plain { p } => p.powi(-(((k - 1) * (k - 2) / 2) as i32)),
            SamplingMode::Color { c } => (c as f64).powi(k as i32 - 2),
        }
    }
}

/// Whether `owner` emits the wedge `(x, y)`.
pub fn sample_decision_plain(seed: u64, owner: NodeId, x: NodeId, y: NodeId, p: f64) -> bool {
    p >= 1.0 || mix::unit(mix::hash_words(mix::DOMAIN_PAIR, seed, &[owner.0, x.0, y.0])) < p
}

/// Color of `x` inside the high-neighborhood of `owner`.
pub fn color_of(seed: u64, owner: NodeId, x: NodeId, c: u32) -> u32 {
    if c <= 1 {
        return 0;
    }
    mix::below(mix::hash_words(mix::DOMAIN_COLOR, seed, &[owner.0, x.0]), c as u64) as u32
}

struct PlainSelector<'g> {
    g: &'g Graph,
    p: f64,
    seed: u64,
}

impl PairSelector for PlainSelector<'_> {
    fn select(&self, owner: Rank, members: &[Rank], emit: &mut dyn FnMut(Rank, Rank)) {
        let o = self.g.label(owner);
        for (i, &x) in members.iter().enumerate() {
            let lx = self.g.label(x);
            for &y in &members[i + 1..] {
                if sample_decision_plain(self.seed, o, lx, self.g.label(y), self.p) {
                    emit(x, y);
                }
            }
        }
    }

    fn scale(&self, k: usize) -> f64 {
        self.p.powi(-(((k - 1) * (k - 2) / 2) as i32))
    }
}

struct ColorSelector<'g> {
    g: &'g Graph,
    c: u32,
    seed: u64,
}

impl PairSelector for ColorSelector<'_> {
    fn select(&self, owner: Rank, members: &[Rank], emit: &mut dyn FnMut(Rank, Rank)) {
        let o = self.g.label(owner);
        let mut colored: Vec<(u32, Rank)> = members
            .iter()
            .map(|&x| (color_of(self.seed, o, self.g.label(x), self.c), x))
            .collect();
        colored.sort_unstable();
        for class in colored.chunk_by(|a, b| a.0 == b.0) {
            for (i, &(_, x)) in class.iter().enumerate() {
                for &(_, y) in &class[i + 1..] {
                    emit(x, y);
                }
            }
        }
    }

    fn scale(&self, k: usize) -> f64 {
        (self.c as f64).powi(k as i32 - 2)
    }
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub k: usize,
    /// The estimate of the k-clique count.
    pub value: f64,
    /// Cliques that survived sampling, before scaling.
    pub sampled_count: u64,
    pub scale: f64,
    pub config: SamplingConfig,
    pub run_report: RunReport,
}

/// Runs the exact pipeline with sampled round-2 wedges and scales the result.
pub fn estimate(g: &Graph, k: usize, config: SamplingConfig, engine: &Engine) -> Result<Estimate> {
    config.validate()?;
    exact::check_k(k)?;
    let out = match config.mode {
        SamplingMode::Plain { p } => exact::run_fff(
            g,
            k,
            engine,
            &PlainSelector {
                g,
                p,
                seed: config.seed,
            },
            Round3Mode::Count,
        )?,
        SamplingMode::Color { c } => exact::run_fff(
            g,
            k,
            engine,
            &ColorSelector {
                g,
                c,
                seed: config.seed,
            },
            Round3Mode::Count,
        )?,
    };
    Ok(Estimate {
        k,
        value: out.scaled,
        sampled_count: out.count,
        scale: config.scale(k),
        config,
        run_report: out.run_report,
    })
}

/// Sampled cliques with their owners first, for cross-checking the sampling rule.
pub fn sampled_cliques(g: &Graph, k: usize, config: SamplingConfig, engine: &Engine) -> Result<Vec<Vec<NodeId>>> {
    config.validate()?;
    let out = match config.mode {
        SamplingMode::Plain { p } => exact::run_fff(
            g,
            k,
            engine,
            &PlainSelector {
                g,
                p,
                seed: config.seed,
            },
            Round3Mode::List,
        )?,
        SamplingMode::Color { c } => exact::run_fff(
            g,
            k,
            engine,
            &ColorSelector {
                g,
                c,
                seed: config.seed,
            },
            Round3Mode::List,
        )?,
    };
    Ok(out.cliques.unwrap_or_default())
}

/// Both sides of the sufficient condition for `(1 ± epsilon)` concentration,
/// with the unspecified constant taken as 1. Advisory only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl ConcentrationCheck {
    pub fn holds(&self) -> bool {
        self.lhs > self.rhs
    }
}

pub fn concentration_check(
    m: usize,
    k: usize,
    clique_count: f64,
    epsilon: f64,
    config: &SamplingConfig,
) -> ConcentrationCheck {
    let m = m as f64;
    let denom = epsilon * epsilon * clique_count;
    match config.mode {
        SamplingMode::Plain { p } => ConcentrationCheck {
            lhs: p.powi(((k - 1) * (k - 2) / 2) as i32),
            rhs: m.powf((k as f64 - 3.0) / 2.0) * m.ln() / denom,
        },
        SamplingMode::Color { c } => ConcentrationCheck {
            lhs: (c as f64).powi(-(k as i32 - 2)),
            rhs: m.powi(k as i32 - 2) * m.ln() / denom,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::fff_count;
    use crate::graph::{normalize, Edge};

    fn engine() -> Engine {
        Engine::with_workers(2, true).unwrap()
    }

    fn gnp(n: u64, p: f64, seed: u64) -> Graph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if mix::unit(mix::hash_words(99, seed, &[a, b])) < p {
                    edges.push(Edge::new(a, b));
                }
            }
        }
        normalize(&edges)
    }

    #[test]
    fn config_validation() {
        assert!(SamplingConfig::plain(0.0, 1).is_err());
        assert!(SamplingConfig::plain(1.5, 1).is_err());
        assert!(SamplingConfig::plain(f64::NAN, 1).is_err());
        assert!(SamplingConfig::plain(1.0, 1).is_ok());
        assert!(SamplingConfig::color(0, 1).is_err());
        assert_eq!(SamplingConfig::plain(0.5, 0).unwrap().scale(4), 8.0);
        assert_eq!(SamplingConfig::color(3, 0).unwrap().scale(4), 9.0);
    }

    #[test]
    fn decisions_trivial_cases() {
        for s in 0..100 {
            assert!(sample_decision_plain(s, NodeId(1), NodeId(2), NodeId(3), 1.0));
            assert_eq!(color_of(s, NodeId(1), NodeId(s), 1), 0);
            assert_eq!(
                sample_decision_plain(s, NodeId(1), NodeId(2), NodeId(3), 0.3),
                sample_decision_plain(s, NodeId(1), NodeId(2), NodeId(3), 0.3)
            );
            assert_eq!(
                color_of(s, NodeId(4), NodeId(5), 7),
                color_of(s, NodeId(4), NodeId(5), 7)
            );
        }
    }

    #[test]
    fn degenerate_sampling_is_exact() {
        for seed in 0..10 {
            let g = gnp(20, 0.5, seed);
            for k in 3..=5 {
                let exact = fff_count(&g, k, &engine(), false).unwrap().count;
                let plain = estimate(&g, k, SamplingConfig::plain(1.0, seed).unwrap(), &engine()).unwrap();
                let color = estimate(&g, k, SamplingConfig::color(1, seed).unwrap(), &engine()).unwrap();
                assert_eq!(plain.value, exact as f64);
                assert_eq!(color.value, exact as f64);
            }
        }
    }

    #[test]
    fn color_sampling_keeps_monochromatic_cliques() {
        let g = gnp(14, 0.7, 5);
        let k = 4;
        let (all, _) = exact::fff_list(&g, k, &engine()).unwrap();
        for seed in 0..5 {
            let cfg = SamplingConfig::color(2, seed).unwrap();
            let mut kept = sampled_cliques(&g, k, cfg, &engine()).unwrap();
            let mut expected: Vec<Vec<NodeId>> = all
                .iter()
                .filter(|q| {
                    let c0 = color_of(seed, q[0], q[1], 2);
                    q[2..].iter().all(|&x| color_of(seed, q[0], x, 2) == c0)
                })
                .cloned()
                .collect();
            kept.sort();
            expected.sort();
            assert_eq!(kept, expected);
        }
    }

    #[test]
    fn concentration_sides() {
        let cfg = SamplingConfig::plain(0.5, 0).unwrap();
        let c = concentration_check(100, 3, 1000.0, 0.1, &cfg);
        assert_eq!(c.lhs, 0.5);
        assert!((c.rhs - 100f64.ln() / 10.0).abs() < 1e-12);
        assert!(c.holds());
        assert!(!concentration_check(100, 3, 100.0, 0.1, &cfg).holds());
    }
}
