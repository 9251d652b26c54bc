//! The decision procedure: bounded backward proof search in the set-form
//! calculus `IELG++`, plus an independent forward-saturation oracle used for
//! cross-validation.

use std::collections::HashMap;

use crate::calculus::{backward_instances, CalculusId, ProofTree};
use crate::formula::{subformula_closure, Formula};
use crate::sequent::{Sequent, SetSequent};

/// Search budget knobs. `max_nodes = None` means unbounded search; the depth
/// budget is always [`depth_bound`] and is not configurable, since the
/// completeness argument depends on it.
#[derive(Clone, Debug, Default)]
pub struct ProveOptions {
    pub max_nodes: Option<usize>,
}

/// Counters reported by the search.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Sequent nodes expanded (instance enumerations performed).
    pub nodes_expanded: usize,
    /// Deepest search-path length reached.
    pub max_depth_reached: usize,
    /// Failures answered from the clean-failure cache.
    pub cache_hits: usize,
}

/// Outcome of [`prove`]. `Unprovable` is a definite verdict: the depth-bounded
/// search space was exhausted. `Inconclusive` only arises when a node budget
/// was set and exceeded.
#[derive(Clone, Debug)]
pub enum SearchResult {
    Proved { proof: ProofTree, stats: SearchStats },
    Unprovable { stats: SearchStats },
    Inconclusive { stats: SearchStats },
}

impl SearchResult {
    pub fn is_proved(&self) -> bool {
        matches!(self, SearchResult::Proved { .. })
    }

    pub fn is_unprovable(&self) -> bool {
        matches!(self, SearchResult::Unprovable { .. })
    }

    pub fn proof(&self) -> Option<&ProofTree> {
        match self {
            SearchResult::Proved { proof, .. } => Some(proof),
            _ => None,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchResult::Proved { stats, .. }
            | SearchResult::Unprovable { stats }
            | SearchResult::Inconclusive { stats } => stats,
        }
    }
}

/// Depth budget `(|S|+1)^2` where `S` is the subformula closure of the
/// sequent (always containing `⊥` and `K⊥`): every provable set sequent has
/// a monotone set-form `IELG++` proof within this depth.
pub fn depth_bound(s: &SetSequent) -> usize {
    let closure = subformula_closure(s.antecedent.iter(), &s.goal);
    (closure.len() + 1) * (closure.len() + 1)
}

enum Fail {
    /// Subtree exhausted; carries the lowest search-path index that any
    /// pruning event in the subtree referred to (`usize::MAX` if none).
    Exhausted(usize),
    /// Node budget exceeded; abort the whole search.
    Aborted,
}

struct Searcher {
    stats: SearchStats,
    path: Vec<SetSequent>,
    path_index: HashMap<SetSequent, usize>,
    /// Sequent → largest remaining-depth budget it is known to fail under,
    /// recorded only for context-independent ("clean") failures.
    failed: HashMap<SetSequent, usize>,
    max_nodes: usize,
}

impl Searcher {
    fn search(&mut self, s: &SetSequent, remaining: usize) -> Result<ProofTree, Fail> {
        if remaining == 0 {
            return Err(Fail::Exhausted(usize::MAX));
        }
        if let Some(&budget) = self.failed.get(s) {
            if remaining <= budget {
                self.stats.cache_hits += 1;
                return Err(Fail::Exhausted(usize::MAX));
            }
        }
        self.stats.nodes_expanded += 1;
        if self.stats.nodes_expanded > self.max_nodes {
            return Err(Fail::Aborted);
        }

        let my_index = self.path.len();
        self.path.push(s.clone());
        self.path_index.insert(s.clone(), my_index);
        self.stats.max_depth_reached = self.stats.max_depth_reached.max(self.path.len());

        let mut min_prune = usize::MAX;
        let mut outcome: Result<ProofTree, Fail> = Err(Fail::Exhausted(usize::MAX));
        'instances: for inst in backward_instances(CalculusId::IelgPlusPlus, s) {
            let mut subproofs = Vec::with_capacity(inst.premises.len());
            for premise in &inst.premises {
                let pset = premise.to_set();
                if let Some(&idx) = self.path_index.get(&pset) {
                    min_prune = min_prune.min(idx);
                    continue 'instances;
                }
                match self.search(&pset, remaining - 1) {
                    Ok(t) => subproofs.push(t),
                    Err(Fail::Exhausted(mp)) => {
                        min_prune = min_prune.min(mp);
                        continue 'instances;
                    }
                    Err(Fail::Aborted) => {
                        outcome = Err(Fail::Aborted);
                        break 'instances;
                    }
                }
            }
            outcome = Ok(ProofTree {
                conclusion: inst.conclusion,
                rule: inst.rule,
                annotation: inst.annotation,
                premises: subproofs,
            });
            break;
        }

        self.path.pop();
        self.path_index.remove(s);
        if let Err(Fail::Exhausted(_)) = outcome {
            if min_prune >= my_index {
                // failure depended on nothing above this node
                let entry = self.failed.entry(s.clone()).or_insert(0);
                *entry = (*entry).max(remaining);
                outcome = Err(Fail::Exhausted(usize::MAX));
            } else {
                outcome = Err(Fail::Exhausted(min_prune));
            }
        }
        outcome
    }
}

/// Decides the sequent. The search runs on the set form `set(Γ) ⇒ G` (which
/// is equiprovable with `Γ ⇒ G`), so the returned proof concludes the set
/// form of the input.
pub fn prove(s: &Sequent, options: &ProveOptions) -> SearchResult {
    let root = s.to_set();
    let budget = depth_bound(&root);
    let mut searcher = Searcher {
        stats: SearchStats::default(),
        path: Vec::new(),
        path_index: HashMap::new(),
        failed: HashMap::new(),
        max_nodes: options.max_nodes.unwrap_or(usize::MAX),
    };
    match searcher.search(&root, budget) {
        Ok(proof) => SearchResult::Proved {
            proof,
            stats: searcher.stats,
        },
        Err(Fail::Exhausted(_)) => SearchResult::Unprovable {
            stats: searcher.stats,
        },
        Err(Fail::Aborted) => SearchResult::Inconclusive {
            stats: searcher.stats,
        },
    }
}

/// Decides theoremhood of a single formula (`∅ ⇒ F`).
pub fn prove_formula(f: &Formula, options: &ProveOptions) -> SearchResult {
    prove(&Sequent::from_goal(f.clone()), options)
}

/// The largest subformula-closure size the oracle will saturate over
/// (`2^|S| · |S|` sequents are tabulated).
pub const ORACLE_CLOSURE_LIMIT: usize = 14;

/// Independent decision procedure by forward saturation: tabulates
/// derivability of every set sequent over the subformula closure `S` as the
/// least fixpoint of the backward rule instances. Returns `None` when
/// `|S| > ORACLE_CLOSURE_LIMIT`.
pub fn saturate_oracle(s: &Sequent) -> Option<bool> {
    let closure = subformula_closure(s.antecedent.support(), &s.goal);
    let n = closure.len();
    if n > ORACLE_CLOSURE_LIMIT {
        return None;
    }
    let formulas: Vec<Formula> = closure.into_iter().collect();
    let index: HashMap<&Formula, usize> = formulas.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let id = |mask: usize, goal: usize| mask * n + goal;
    let seq_id = |sq: &SetSequent| -> usize {
        let mut mask = 0usize;
        for f in &sq.antecedent {
            mask |= 1 << index[f];
        }
        id(mask, index[&sq.goal])
    };

    let total = (1usize << n) * n;
    let mut derivable = vec![false; total];
    // instances with at least one premise, flattened
    let mut inst_concl: Vec<u32> = Vec::new();
    let mut inst_prems: Vec<(u32, u32)> = Vec::new(); // u32::MAX = absent
    for mask in 0..(1usize << n) {
        let antecedent: crate::formula::FormulaSet = formulas
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, f)| f.clone())
            .collect();
        for (gi, goal) in formulas.iter().enumerate() {
            let sq = SetSequent::new(antecedent.clone(), goal.clone());
            for inst in backward_instances(CalculusId::IelgPlusPlus, &sq) {
                if inst.premises.is_empty() {
                    derivable[id(mask, gi)] = true;
                    continue;
                }
                inst_concl.push(id(mask, gi) as u32);
                let p0 = seq_id(&inst.premises[0].to_set()) as u32;
                let p1 = inst
                    .premises
                    .get(1)
                    .map(|p| seq_id(&p.to_set()) as u32)
                    .unwrap_or(u32::MAX);
                inst_prems.push((p0, p1));
            }
        }
    }

    let mut changed = true;
    while changed {
        changed = false;
        for (k, &(p0, p1)) in inst_prems.iter().enumerate() {
            let c = inst_concl[k] as usize;
            if derivable[c] {
                continue;
            }
            if derivable[p0 as usize] && (p1 == u32::MAX || derivable[p1 as usize]) {
                derivable[c] = true;
                changed = true;
            }
        }
    }

    Some(derivable[seq_id(&s.to_set())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_proof;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }
    fn kp() -> Formula {
        Formula::know(p())
    }
    fn parse(t: &str) -> Formula {
        Formula::parse(t).unwrap()
    }

    fn decide(f: &Formula) -> SearchResult {
        let r = prove_formula(f, &ProveOptions::default());
        if let SearchResult::Proved { proof, .. } = &r {
            let v = check_proof(CalculusId::IelgPlusPlus, proof);
            assert!(v.is_valid(), "returned proof invalid: {v}");
            assert!(proof.is_monotone());
            assert!(proof.is_set_form());
        }
        r
    }

    #[test]
    fn depth_bound_values() {
        // closure of |- _|_ is {_|_, K_|_}
        assert_eq!(depth_bound(&Sequent::parse("|- false").unwrap().to_set()), 9);
        // closure of |- Kp is {p, Kp, _|_, K_|_}
        assert_eq!(depth_bound(&Sequent::parse("|- Kp").unwrap().to_set()), 25);
    }

    #[test]
    fn consistency_is_a_theorem() {
        assert!(decide(&parse("~Kfalse")).is_proved());
    }

    #[test]
    fn co_reflection_is_a_theorem() {
        assert!(decide(&parse("p -> Kp")).is_proved());
    }

    #[test]
    fn reflection_is_not_a_theorem() {
        assert!(decide(&parse("Kp -> p")).is_unprovable());
    }

    #[test]
    fn negative_reflection_is_a_theorem() {
        assert!(decide(&parse("K~p -> ~p")).is_proved());
    }

    #[test]
    fn k_bottom_implies_bottom() {
        let r = prove(&Sequent::parse("Kfalse |- false").unwrap(), &ProveOptions::default());
        assert!(r.is_proved());
    }

    #[test]
    fn distribution_is_a_theorem() {
        assert!(decide(&parse("K(p -> q) -> (Kp -> Kq)")).is_proved());
    }

    #[test]
    fn positive_introspection_sequent() {
        let r = prove(&Sequent::parse("Kp |- KKp").unwrap(), &ProveOptions::default());
        assert!(r.is_proved());
    }

    #[test]
    fn excluded_middle_is_not_a_theorem() {
        assert!(decide(&parse("p | ~p")).is_unprovable());
    }

    #[test]
    fn node_budget_gives_inconclusive() {
        let r = prove_formula(
            &parse("K(p -> q) -> (Kp -> Kq)"),
            &ProveOptions { max_nodes: Some(1) },
        );
        assert!(matches!(r, SearchResult::Inconclusive { .. }));
    }

    #[test]
    fn oracle_agrees_on_basic_corpus() {
        for (text, expect) in [
            ("~Kfalse", true),
            ("p -> Kp", true),
            ("Kp -> p", false),
            ("K~p -> ~p", true),
            ("p | ~p", false),
            ("Kp & Kq -> K(p & q)", true),
        ] {
            let s = Sequent::from_goal(parse(text));
            assert_eq!(saturate_oracle(&s), Some(expect), "{text}");
        }
    }

    #[test]
    fn oracle_rejects_large_closures() {
        // a goal with a closure larger than the tabulation limit
        let f = parse("(a1 & a2) | (a3 & a4) | (a5 & a6) | (a7 & a8) -> b1 & b2 & b3");
        assert_eq!(saturate_oracle(&Sequent::from_goal(f)), None);
    }

    #[test]
    fn proofs_respect_depth_bound_and_subformula_property() {
        for text in ["p -> Kp", "K(p -> q) -> (Kp -> Kq)", "~Kfalse"] {
            let s = Sequent::from_goal(parse(text));
            let SearchResult::Proved { proof, .. } = prove(&s, &ProveOptions::default()) else {
                panic!("{text} should be provable");
            };
            let bound = depth_bound(&s.to_set());
            assert!(proof.depth() <= bound);
            let closure = subformula_closure(s.antecedent.support(), &s.goal);
            for f in proof.formulas() {
                assert!(closure.contains(&f), "{f} outside the closure");
            }
        }
        let _ = (p(), q(), kp());
    }
}
