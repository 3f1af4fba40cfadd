//! Grounding walk rules against evidence.
//!
//! For an example `target(a,b)` and a lifted walk `Q_1 ; ... ; Q_len`, a
//! grounding is a constant chain `c_0=a, ..., c_len=b` whose every chain
//! atom `Q_k(c_{k-1}, c_k)` is in evidence. [`ground_exhaustive`] finds
//! all of them by a forward chain join over the successor index;
//! [`ground_sampled`] finds a bounded random subset by restarting uniform
//! forward walks, for databases where exhaustive grounding is too large.
//!
//! Grounding is a pure read over an immutable store.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::logic::{Atom, ConstId, FactStore, TargetExample};
use crate::schema::LiftedWalk;

/// One substitution for a walk: the constant chain it binds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grounding {
    pub walk_id: usize,
    /// `bindings[0]` is the example's first argument, the last entry its
    /// second; intermediate entries follow the walk's variable chain.
    pub bindings: Vec<ConstId>,
}

impl Grounding {
    /// The chain atoms this grounding asserts, in walk order.
    pub fn atoms(&self, walk: &LiftedWalk) -> Vec<Atom> {
        walk.chain
            .iter()
            .zip(self.bindings.windows(2))
            .map(|(pred, pair)| Atom::new(*pred, pair[0], pair[1]))
            .collect()
    }
}

/// The groundings found for one (example, walk) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundingSet {
    pub walk_id: usize,
    pub groundings: Vec<Grounding>,
    /// Set when the sampling budget was filled, so further groundings may
    /// exist beyond the returned subset. Exhaustive mode never sets it.
    pub truncated: bool,
}

impl GroundingSet {
    pub fn len(&self) -> usize {
        self.groundings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groundings.is_empty()
    }
}

fn assert_sound(set: &GroundingSet, walk: &LiftedWalk, store: &FactStore) {
    debug_assert!(set.groundings.iter().all(|g| {
        g.atoms(walk).iter().all(|atom| store.contains(atom))
    }));
}

/// Enumerate every grounding of `walk` for the example, via a forward
/// chain join with the final position filtered to the example's second
/// argument. The result order is deterministic.
pub fn ground_exhaustive(walk: &LiftedWalk, ex: &TargetExample, store: &FactStore) -> GroundingSet {
    let len = walk.body_len();
    debug_assert!(len >= 1, "walk bodies have at least one step");
    let mut frontier: Vec<Vec<ConstId>> = vec![vec![ex.arg1]];
    for (k, pred) in walk.chain.iter().enumerate() {
        let last_step = k + 1 == len;
        let mut next = Vec::new();
        for chain in &frontier {
            let tail = *chain.last().expect("chains start non-empty");
            let Ok(succs) = store.successors(*pred, tail) else {
                continue; // type-broken prefix, cannot extend
            };
            if last_step {
                if succs.contains(&ex.arg2) {
                    let mut done = chain.clone();
                    done.push(ex.arg2);
                    next.push(done);
                }
            } else {
                for &succ in succs {
                    let mut extended = chain.clone();
                    extended.push(succ);
                    next.push(extended);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let groundings = frontier
        .into_iter()
        .map(|bindings| Grounding { walk_id: walk.rule_id, bindings })
        .collect();
    let set = GroundingSet { walk_id: walk.rule_id, groundings, truncated: false };
    assert_sound(&set, walk, store);
    set
}

/// Sample up to `budget` distinct groundings of `walk` by randomized
/// restarts of a uniform forward walk over the successor index, accepting
/// a trial when its final step lands on the example's second argument.
/// The result is a subset of [`ground_exhaustive`]'s, deterministic for a
/// fixed seed; trials stop after `budget` accepts or `50 * budget`
/// restarts.
pub fn ground_sampled(
    walk: &LiftedWalk,
    ex: &TargetExample,
    store: &FactStore,
    budget: usize,
    seed: u64,
) -> GroundingSet {
    assert!(budget >= 1, "sampling budget must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = walk.body_len();
    let max_trials = budget.saturating_mul(50);
    let mut found: HashSet<Vec<ConstId>> = HashSet::new();
    let mut groundings: Vec<Grounding> = Vec::new();

    'trials: for _ in 0..max_trials {
        if groundings.len() >= budget {
            break;
        }
        let mut bindings = Vec::with_capacity(len + 1);
        bindings.push(ex.arg1);
        for (k, pred) in walk.chain.iter().enumerate() {
            let tail = *bindings.last().expect("non-empty");
            let succs = match store.successors(*pred, tail) {
                Ok(s) => s,
                Err(_) => continue 'trials,
            };
            if k + 1 == len {
                if succs.contains(&ex.arg2) {
                    bindings.push(ex.arg2);
                } else {
                    continue 'trials;
                }
            } else {
                if succs.is_empty() {
                    continue 'trials;
                }
                let pick = rng.random_range(0..succs.len());
                let succ = *succs.iter().nth(pick).expect("index in range");
                bindings.push(succ);
            }
        }
        if found.insert(bindings.clone()) {
            groundings.push(Grounding { walk_id: walk.rule_id, bindings });
        }
    }

    let truncated = groundings.len() >= budget;
    let set = GroundingSet { walk_id: walk.rule_id, groundings, truncated };
    assert_sound(&set, walk, store);
    set
}

/// Memo for grounding results keyed by `(walk_id, a, b)`, used when the
/// same example is grounded repeatedly (e.g. scoring after training).
#[derive(Debug, Default)]
pub struct GroundingCache {
    map: HashMap<(usize, ConstId, ConstId), GroundingSet>,
    hits: usize,
    misses: usize,
}

impl GroundingCache {
    pub fn new() -> GroundingCache {
        GroundingCache::default()
    }

    pub fn get_or_compute(
        &mut self,
        walk: &LiftedWalk,
        ex: &TargetExample,
        compute: impl FnOnce() -> GroundingSet,
    ) -> GroundingSet {
        let key = (walk.rule_id, ex.arg1, ex.arg2);
        if let Some(cached) = self.map.get(&key) {
            self.hits += 1;
            return cached.clone();
        }
        self.misses += 1;
        let set = compute();
        self.map.insert(key, set.clone());
        set
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn misses(&self) -> usize {
        self.misses
    }
}

/// Render one grounding as a dump line: `j | a,b | c_0;c_1;...;c_len`.
pub fn dump_line(g: &Grounding, ex: &TargetExample, store: &FactStore) -> String {
    let chain: Vec<&str> = g.bindings.iter().map(|c| store.const_symbol(*c)).collect();
    format!(
        "{} | {},{} | {}",
        g.walk_id,
        store.const_symbol(ex.arg1),
        store.const_symbol(ex.arg2),
        chain.join(";")
    )
}
