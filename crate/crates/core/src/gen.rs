//! Seeded random finite interaction trees, for law checking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::itree::{ITree, KTree};
use crate::optics::{Event, Value};
use crate::pfun::PFun;

/// A finite tree in plain data form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FTree {
    Ret(i64),
    Sil(Box<FTree>),
    Vis(Vec<(Event, FTree)>),
}

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_events: usize,
    /// Events are drawn from `e0 .. e{alphabet-1}`.
    pub alphabet: usize,
    /// Return values are drawn from `0 .. returns`.
    pub returns: i64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            max_events: 3,
            alphabet: 4,
            returns: 3,
        }
    }
}

pub fn event(i: usize) -> Event {
    Event::sync(format!("e{i}"))
}

impl FTree {
    pub fn random(rng: &mut impl Rng, cfg: &GenConfig) -> FTree {
        Self::random_at(rng, cfg, cfg.max_depth)
    }

    pub fn from_seed(seed: u64, cfg: &GenConfig) -> FTree {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
    }

    fn random_at(rng: &mut impl Rng, cfg: &GenConfig, depth: usize) -> FTree {
        let roll = if depth == 0 { 0 } else { rng.random_range(0..10) };
        match roll {
            0..=2 => FTree::Ret(rng.random_range(0..cfg.returns.max(1))),
            3 => FTree::Sil(Box::new(Self::random_at(rng, cfg, depth - 1))),
            _ => {
                let n = rng.random_range(0..=cfg.max_events);
                let mut used = Vec::new();
                let mut menu = Vec::new();
                for _ in 0..n {
                    let i = rng.random_range(0..cfg.alphabet.max(1));
                    if used.contains(&i) {
                        continue;
                    }
                    used.push(i);
                    menu.push((event(i), Self::random_at(rng, cfg, depth - 1)));
                }
                FTree::Vis(menu)
            }
        }
    }

    pub fn to_itree(&self) -> ITree<Value> {
        match self {
            FTree::Ret(v) => ITree::ret(Value::Int(*v)),
            FTree::Sil(t) => ITree::sil(t.to_itree()),
            FTree::Vis(m) => ITree::vis(PFun::from_alist(m.iter().map(|(e, t)| (e.clone(), t.to_itree())))),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            FTree::Ret(_) => 0,
            FTree::Sil(t) => 1 + t.depth(),
            FTree::Vis(m) => 1 + m.iter().map(|(_, t)| t.depth()).max().unwrap_or(0),
        }
    }
}

/// A random Kleisli tree: each argument gets its own finite tree, derived
/// from `seed` and the argument.
pub fn random_ktree(seed: u64, cfg: GenConfig) -> KTree<Value, Value> {
    KTree::new(move |x: Value| {
        let salt = match x {
            Value::Int(i) => i as u64,
            ref other => other
                .to_string()
                .bytes()
                .fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64)),
        };
        FTree::from_seed(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15), &cfg).to_itree()
    })
}

/// The finite-tree form of a Kleisli tree, for oracles.
pub fn random_kfun(seed: u64, cfg: GenConfig) -> impl Fn(i64) -> FTree + Clone {
    move |x: i64| FTree::from_seed(seed ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn respects_bounds() {
        let cfg = GenConfig::default();
        for seed in 0..200 {
            let t = FTree::from_seed(seed, &cfg);
            assert!(t.depth() <= cfg.max_depth);
            fn check(t: &FTree) {
                if let FTree::Vis(m) = t {
                    assert!(m.len() <= 3);
                    m.iter().for_each(|(_, t)| check(t));
                }
                if let FTree::Sil(t) = t {
                    check(t);
                }
            }
            check(&t);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = GenConfig::default();
        assert_eq!(FTree::from_seed(7, &cfg), FTree::from_seed(7, &cfg));
    }

    #[test]
    fn ktree_agrees_with_kfun() {
        let cfg = GenConfig::default();
        let k = random_ktree(11, cfg);
        let f = random_kfun(11, cfg);
        for x in 0..3 {
            let a = k.apply(Value::Int(x));
            let b = f(x).to_itree();
            assert!(crate::itree::bisim_to_depth(&a, &b, 16, 16).is_true());
        }
    }
}
