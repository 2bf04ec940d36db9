//! Following τ-spines to a stable node.

use std::collections::HashSet;

use super::{ITree, Node, Output};

#[derive(Debug, Clone)]
pub enum StabResult<R> {
    /// A stable node reached after `taus` silent steps.
    Stable {
        taus: usize,
        node: ITree<R>,
    },
    FuelExhausted,
}

/// Strips at most `fuel` leading `Sil`s.
pub fn stabilises_within<R: Output>(p: &ITree<R>, fuel: usize) -> StabResult<R> {
    let mut cur = p.clone();
    for taus in 0..=fuel {
        let next = match cur.force() {
            Node::Sil(c) => c.clone(),
            _ => return StabResult::Stable { taus, node: cur },
        };
        cur = next;
    }
    StabResult::FuelExhausted
}

#[derive(Debug, Clone)]
pub enum Stabilisation<R> {
    Stable {
        taus: usize,
        node: ITree<R>,
    },
    /// The τ-spine revisits a node: the tree diverges.
    Cycle {
        taus: usize,
    },
    FuelExhausted,
}

impl<R> Stabilisation<R> {
    pub fn diverges(&self) -> bool {
        matches!(self, Stabilisation::Cycle { .. })
    }
}

/// Like [`stabilises_within`], but recognises τ-cycles by node identity.
pub fn stabilise<R: Output>(p: &ITree<R>, fuel: usize) -> Stabilisation<R> {
    let mut seen = HashSet::new();
    let mut cur = p.clone();
    for taus in 0..=fuel {
        if !seen.insert(cur.id()) {
            return Stabilisation::Cycle { taus };
        }
        let next = match cur.force() {
            Node::Sil(c) => c.clone(),
            _ => {
                return Stabilisation::Stable {
                    taus,
                    node: cur.target(),
                }
            }
        };
        cur = next;
    }
    Stabilisation::FuelExhausted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itree::div;

    #[test]
    fn counts_taus() {
        let t = ITree::taus(3, ITree::ret(1));
        match stabilises_within(&t, 10) {
            StabResult::Stable { taus, node } => {
                assert_eq!(taus, 3);
                assert!(matches!(node.force(), Node::Ret(1)));
            }
            StabResult::FuelExhausted => panic!(),
        }
        assert!(matches!(stabilises_within(&t, 2), StabResult::FuelExhausted));
        assert!(matches!(stabilises_within(&t, 3), StabResult::Stable { .. }));
    }

    #[test]
    fn div_never_stabilises() {
        let d = div::<i32>();
        assert!(matches!(stabilises_within(&d, 100_000), StabResult::FuelExhausted));
        assert!(stabilise(&d, 1000).diverges());
    }

    #[test]
    fn long_spine_is_not_a_cycle() {
        let t = ITree::taus(50, ITree::ret(()));
        assert!(matches!(stabilise(&t, 40), Stabilisation::FuelExhausted));
        assert!(matches!(stabilise(&t, 50), Stabilisation::Stable { taus: 50, .. }));
    }
}
