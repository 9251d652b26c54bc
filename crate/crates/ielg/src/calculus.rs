//! Rule tables for the four calculi, proof trees, rule-instance validation,
//! the proof checker, and backward instance enumeration for `IELG++`.

use std::fmt;
use std::str::FromStr;

use crate::formula::{Formula, FormulaSet};
use crate::sequent::{k_prefix_set, Multiset, Sequent, SetSequent};

/// The four sequent calculi. Only `Ielg` contains `(Cut)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CalculusId {
    /// `IELG`: intuitionistic base with explicit contraction, the modal rules
    /// `(KI0)` and `(KC)`, the axiom `Gamma, K_|_ |- F`, and `(Cut)`.
    Ielg,
    /// `IELG-`: the cut-free calculus with `(KI1)` and `(U)`.
    IelgMinus,
    /// `IELG+`: contraction plus the simple `(KI)` rule.
    IelgPlus,
    /// `IELG++`: `IELG-` extended by contraction and the contraction-absorbed
    /// rule variants used by the prover.
    IelgPlusPlus,
}

impl CalculusId {
    pub const ALL: [CalculusId; 4] = [
        CalculusId::Ielg,
        CalculusId::IelgMinus,
        CalculusId::IelgPlus,
        CalculusId::IelgPlusPlus,
    ];
}

impl fmt::Display for CalculusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CalculusId::Ielg => "ielg",
            CalculusId::IelgMinus => "ielg-",
            CalculusId::IelgPlus => "ielg+",
            CalculusId::IelgPlusPlus => "ielg++",
        })
    }
}

impl FromStr for CalculusId {
    type Err = String;

    fn from_str(s: &str) -> Result<CalculusId, String> {
        match s {
            "ielg" => Ok(CalculusId::Ielg),
            "ielg-" => Ok(CalculusId::IelgMinus),
            "ielg+" => Ok(CalculusId::IelgPlus),
            "ielg++" => Ok(CalculusId::IelgPlusPlus),
            _ => Err(format!("unknown calculus '{s}'")),
        }
    }
}

/// Names of all inference rules across the four calculi.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RuleName {
    Axiom,
    /// `Gamma, K_|_ |- F` (zero-premise, `IELG` only).
    KBotAxiom,
    AndL,
    AndR,
    OrL,
    OrR1,
    OrR2,
    ImpL,
    ImpR,
    KI0,
    KC,
    /// K-elimination, kept as a name for documents; member of no calculus
    /// (it is admissible, not primitive).
    KE,
    Cut,
    KI1,
    U,
    C,
    AndL1C,
    AndL2C,
    AndLC,
    OrLC,
    ImpRW,
    ImpLC,
    KI1W,
    /// The `IELG+` K-introduction `Gamma1, K(Gamma2) |- KF`.
    KI,
}

impl RuleName {
    pub fn as_str(&self) -> &'static str {
        match self {
            RuleName::Axiom => "Axiom",
            RuleName::KBotAxiom => "KBotAxiom",
            RuleName::AndL => "AndL",
            RuleName::AndR => "AndR",
            RuleName::OrL => "OrL",
            RuleName::OrR1 => "OrR1",
            RuleName::OrR2 => "OrR2",
            RuleName::ImpL => "ImpL",
            RuleName::ImpR => "ImpR",
            RuleName::KI0 => "KI0",
            RuleName::KC => "KC",
            RuleName::KE => "KE",
            RuleName::Cut => "Cut",
            RuleName::KI1 => "KI1",
            RuleName::U => "U",
            RuleName::C => "C",
            RuleName::AndL1C => "AndL1C",
            RuleName::AndL2C => "AndL2C",
            RuleName::AndLC => "AndLC",
            RuleName::OrLC => "OrLC",
            RuleName::ImpRW => "ImpRW",
            RuleName::ImpLC => "ImpLC",
            RuleName::KI1W => "KI1W",
            RuleName::KI => "KI",
        }
    }

    /// Calculus membership table.
    pub fn belongs_to(&self, cal: CalculusId) -> bool {
        use CalculusId::*;
        use RuleName::*;
        match self {
            Axiom | AndL | AndR | OrL | OrR1 | OrR2 | ImpL | ImpR => true,
            KBotAxiom | KI0 | KC | Cut => cal == Ielg,
            KI1 => matches!(cal, IelgMinus | IelgPlusPlus),
            U => matches!(cal, IelgMinus | IelgPlus | IelgPlusPlus),
            C => matches!(cal, Ielg | IelgPlus | IelgPlusPlus),
            KI => cal == IelgPlus,
            AndL1C | AndL2C | AndLC | OrLC | ImpRW | ImpLC | KI1W => cal == IelgPlusPlus,
            KE => false,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, RuleName::Axiom | RuleName::KBotAxiom)
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = String;

    fn from_str(s: &str) -> Result<RuleName, String> {
        use RuleName::*;
        for r in [
            Axiom, KBotAxiom, AndL, AndR, OrL, OrR1, OrR2, ImpL, ImpR, KI0, KC, KE, Cut, KI1, U,
            C, AndL1C, AndL2C, AndLC, OrLC, ImpRW, ImpLC, KI1W, KI,
        ] {
            if r.as_str() == s {
                return Ok(r);
            }
        }
        Err(format!("unknown rule name '{s}'"))
    }
}

/// Rule-specific witness data attached to a proof node.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub enum Annotation {
    #[default]
    None,
    /// Principal antecedent formula (axioms, left rules, `(KC)`).
    Principal(Formula),
    /// The cut formula for `(Cut)`.
    CutFormula(Formula),
    /// The multiset `Delta` of `(KI1)`.
    Delta(Multiset),
    /// The partition `(Delta1, Delta2)` of `(KI1W)`.
    DeltaSplit(Multiset, Multiset),
    /// The multiset `Gamma2` of the `IELG+` rule `(KI)`.
    Gamma2(Multiset),
    /// The contracted multiset `Delta` of `(C)`.
    Contract(Multiset),
}

/// A proof tree node: conclusion, rule, premises, and annotation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofTree {
    pub conclusion: Sequent,
    pub rule: RuleName,
    pub annotation: Annotation,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn leaf(rule: RuleName, conclusion: Sequent, annotation: Annotation) -> ProofTree {
        ProofTree {
            conclusion,
            rule,
            annotation,
            premises: Vec::new(),
        }
    }

    pub fn axiom(conclusion: Sequent, principal: Formula) -> ProofTree {
        ProofTree::leaf(RuleName::Axiom, conclusion, Annotation::Principal(principal))
    }

    pub fn node(
        rule: RuleName,
        conclusion: Sequent,
        annotation: Annotation,
        premises: Vec<ProofTree>,
    ) -> ProofTree {
        ProofTree {
            conclusion,
            rule,
            annotation,
            premises,
        }
    }

    /// Proof depth: leaves count 1.
    pub fn depth(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(ProofTree::depth)
            .max()
            .unwrap_or(0)
    }

    /// Number of `(Cut)` nodes.
    pub fn cut_count(&self) -> usize {
        let here = usize::from(self.rule == RuleName::Cut);
        here + self.premises.iter().map(ProofTree::cut_count).sum::<usize>()
    }

    /// Total number of nodes.
    pub fn node_count(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(ProofTree::node_count)
            .sum::<usize>()
    }

    /// True when every rule instance is monotone: the support of the
    /// conclusion antecedent is contained in every premise antecedent.
    pub fn is_monotone(&self) -> bool {
        self.premises.iter().all(|p| {
            p.conclusion
                .antecedent
                .includes_support(&self.conclusion.antecedent)
        }) && self.premises.iter().all(ProofTree::is_monotone)
    }

    /// True when every sequent in the tree has a duplicate-free antecedent.
    pub fn is_set_form(&self) -> bool {
        self.conclusion.antecedent.is_duplicate_free()
            && self.premises.iter().all(ProofTree::is_set_form)
    }

    /// All formulas occurring in any sequent of the tree.
    pub fn formulas(&self) -> FormulaSet {
        let mut out = FormulaSet::new();
        self.collect_formulas(&mut out);
        out
    }

    fn collect_formulas(&self, out: &mut FormulaSet) {
        for f in self.conclusion.antecedent.support() {
            out.insert(f.clone());
        }
        out.insert(self.conclusion.goal.clone());
        for p in &self.premises {
            p.collect_formulas(out);
        }
    }

    /// The subtree at `path` (child indices from the root).
    pub fn subtree(&self, path: &[usize]) -> Option<&ProofTree> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.premises.get(i)?.subtree(rest),
        }
    }
}

/// Outcome of checking a rule instance or a whole proof.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CheckVerdict {
    Valid,
    Invalid { path: Vec<usize>, reason: String },
}

impl CheckVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, CheckVerdict::Valid)
    }

    fn invalid(reason: impl Into<String>) -> CheckVerdict {
        CheckVerdict::Invalid {
            path: Vec::new(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckVerdict::Valid => f.write_str("VALID"),
            CheckVerdict::Invalid { path, reason } => {
                write!(f, "INVALID at {path:?}: {reason}")
            }
        }
    }
}

macro_rules! require {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return CheckVerdict::invalid(format!($($msg)*));
        }
    };
}

/// Checks a single rule instance against the schema tables of `cal`.
pub fn validate_instance(
    cal: CalculusId,
    rule: RuleName,
    conclusion: &Sequent,
    premises: &[&Sequent],
    annotation: &Annotation,
) -> CheckVerdict {
    require!(
        rule.belongs_to(cal),
        "rule {rule} is not part of calculus {cal}"
    );

    let ante = &conclusion.antecedent;
    let goal = &conclusion.goal;
    let arity = |n: usize| -> Option<CheckVerdict> {
        if premises.len() != n {
            Some(CheckVerdict::invalid(format!(
                "rule {rule} expects {n} premises, got {}",
                premises.len()
            )))
        } else {
            None
        }
    };

    macro_rules! check_arity {
        ($n:expr) => {
            if let Some(v) = arity($n) {
                return v;
            }
        };
    }
    macro_rules! premise_eq {
        ($idx:expr, $ante:expr, $goal:expr) => {{
            let expect_ante: Multiset = $ante;
            let expect_goal: &Formula = $goal;
            require!(
                premises[$idx].antecedent == expect_ante,
                "premise {} antecedent mismatch for {rule}: expected '{}', found '{}'",
                $idx,
                Sequent::new(expect_ante.clone(), expect_goal.clone()),
                premises[$idx]
            );
            require!(
                &premises[$idx].goal == expect_goal,
                "premise {} goal mismatch for {rule}: expected '{}', found '{}'",
                $idx,
                expect_goal,
                premises[$idx].goal
            );
        }};
    }

    match rule {
        RuleName::Axiom => {
            check_arity!(0);
            let Annotation::Principal(a) = annotation else {
                return CheckVerdict::invalid("Axiom requires a principal annotation");
            };
            require!(
                a.is_atomic(),
                "axiom principal formula must be a variable or bottom, got '{a}'"
            );
            require!(goal == a, "axiom goal '{goal}' differs from principal '{a}'");
            require!(ante.contains(a), "axiom principal '{a}' not in antecedent");
            CheckVerdict::Valid
        }
        RuleName::KBotAxiom => {
            check_arity!(0);
            let kbot = Formula::know(Formula::Bottom);
            require!(ante.contains(&kbot), "antecedent does not contain K_|_");
            CheckVerdict::Valid
        }
        RuleName::AndL => {
            check_arity!(1);
            let Annotation::Principal(f) = annotation else {
                return CheckVerdict::invalid("AndL requires a principal annotation");
            };
            let Formula::And(a, b) = f else {
                return CheckVerdict::invalid("AndL principal must be a conjunction");
            };
            let Some(rest) = ante.minus_one(f) else {
                return CheckVerdict::invalid(format!("principal '{f}' not in antecedent"));
            };
            premise_eq!(0, rest.plus(a).plus(b), goal);
            CheckVerdict::Valid
        }
        RuleName::AndR => {
            check_arity!(2);
            let Formula::And(a, b) = goal else {
                return CheckVerdict::invalid("AndR goal must be a conjunction");
            };
            premise_eq!(0, ante.clone(), a);
            premise_eq!(1, ante.clone(), b);
            CheckVerdict::Valid
        }
        RuleName::OrL => {
            check_arity!(2);
            let Annotation::Principal(f) = annotation else {
                return CheckVerdict::invalid("OrL requires a principal annotation");
            };
            let Formula::Or(a, b) = f else {
                return CheckVerdict::invalid("OrL principal must be a disjunction");
            };
            let Some(rest) = ante.minus_one(f) else {
                return CheckVerdict::invalid(format!("principal '{f}' not in antecedent"));
            };
            premise_eq!(0, rest.plus(a), goal);
            premise_eq!(1, rest.plus(b), goal);
            CheckVerdict::Valid
        }
        RuleName::OrR1 | RuleName::OrR2 => {
            check_arity!(1);
            let Formula::Or(a, b) = goal else {
                return CheckVerdict::invalid("OrR goal must be a disjunction");
            };
            let side = if rule == RuleName::OrR1 { a } else { b };
            premise_eq!(0, ante.clone(), side);
            CheckVerdict::Valid
        }
        RuleName::ImpR => {
            check_arity!(1);
            let Formula::Implies(a, b) = goal else {
                return CheckVerdict::invalid("ImpR goal must be an implication");
            };
            premise_eq!(0, ante.plus(a), b);
            CheckVerdict::Valid
        }
        RuleName::ImpL => {
            check_arity!(2);
            let Annotation::Principal(f) = annotation else {
                return CheckVerdict::invalid("ImpL requires a principal annotation");
            };
            let Formula::Implies(a, b) = f else {
                return CheckVerdict::invalid("ImpL principal must be an implication");
            };
            let Some(rest) = ante.minus_one(f) else {
                return CheckVerdict::invalid(format!("principal '{f}' not in antecedent"));
            };
            if cal == CalculusId::IelgPlus {
                // Gamma |- F ; Gamma, G |- H  /  Gamma, F->G |- H
                premise_eq!(0, rest.clone(), a);
            } else {
                // Gamma, F->G |- F ; Gamma, G |- H  /  Gamma, F->G |- H
                premise_eq!(0, ante.clone(), a);
            }
            premise_eq!(1, rest.plus(b), goal);
            CheckVerdict::Valid
        }
        RuleName::KI0 => {
            check_arity!(1);
            let Formula::Know(f) = goal else {
                return CheckVerdict::invalid("KI0 goal must be a K-formula");
            };
            require!(
                ante == &premises[0].antecedent.know_image(),
                "KI0 conclusion antecedent must be the K-image of the premise antecedent"
            );
            require!(
                premises[0].goal == **f,
                "KI0 premise goal must be the body of the conclusion goal"
            );
            CheckVerdict::Valid
        }
        RuleName::KC => {
            check_arity!(1);
            let Annotation::Principal(f) = annotation else {
                return CheckVerdict::invalid("KC requires a principal annotation");
            };
            require!(ante.contains(f), "KC principal '{f}' not in antecedent");
            premise_eq!(0, ante.plus(&Formula::know(f.clone())), goal);
            CheckVerdict::Valid
        }
        RuleName::Cut => {
            check_arity!(2);
            let Annotation::CutFormula(f) = annotation else {
                return CheckVerdict::invalid("Cut requires a cut-formula annotation");
            };
            require!(
                &premises[0].goal == f,
                "left premise goal must be the cut formula"
            );
            let Some(gamma2) = premises[1].antecedent.minus_one(f) else {
                return CheckVerdict::invalid("right premise antecedent must contain the cut formula");
            };
            require!(
                &premises[1].goal == goal,
                "right premise goal must match the conclusion goal"
            );
            require!(
                ante == &premises[0].antecedent.sum(&gamma2),
                "Cut conclusion antecedent must be the sum of the premise contexts"
            );
            CheckVerdict::Valid
        }
        RuleName::KI1 => {
            check_arity!(1);
            let Annotation::Delta(delta) = annotation else {
                return CheckVerdict::invalid("KI1 requires a Delta annotation");
            };
            let Formula::Know(f) = goal else {
                return CheckVerdict::invalid("KI1 goal must be a K-formula");
            };
            let Some(gamma) = ante.checked_sub(&delta.know_image()) else {
                return CheckVerdict::invalid("K(Delta) not contained in the conclusion antecedent");
            };
            require!(
                gamma.is_know_free(),
                "side condition violated: Gamma contains a K-formula outside K(Delta)"
            );
            premise_eq!(0, ante.sum(delta), f);
            CheckVerdict::Valid
        }
        RuleName::U => {
            check_arity!(1);
            premise_eq!(0, ante.clone(), &Formula::know(Formula::Bottom));
            CheckVerdict::Valid
        }
        RuleName::C => {
            check_arity!(1);
            let Annotation::Contract(delta) = annotation else {
                return CheckVerdict::invalid("C requires a Contract annotation");
            };
            require!(!delta.is_empty(), "C with empty Delta is trivial");
            require!(
                ante.includes(delta),
                "contracted multiset not contained in the conclusion antecedent"
            );
            premise_eq!(0, ante.sum(delta), goal);
            CheckVerdict::Valid
        }
        RuleName::KI => {
            check_arity!(1);
            let Annotation::Gamma2(gamma2) = annotation else {
                return CheckVerdict::invalid("KI requires a Gamma2 annotation");
            };
            let Formula::Know(f) = goal else {
                return CheckVerdict::invalid("KI goal must be a K-formula");
            };
            let Some(gamma1) = ante.checked_sub(&gamma2.know_image()) else {
                return CheckVerdict::invalid("K(Gamma2) not contained in the conclusion antecedent");
            };
            premise_eq!(0, gamma1.sum(gamma2), f);
            CheckVerdict::Valid
        }
        RuleName::AndL1C | RuleName::AndL2C | RuleName::AndLC => {
            check_arity!(1);
            let Annotation::Principal(p) = annotation else {
                return CheckVerdict::invalid("contraction-absorbed AndL requires a principal");
            };
            let Formula::And(a, b) = p else {
                return CheckVerdict::invalid("principal must be a conjunction");
            };
            require!(ante.contains(p), "principal '{p}' not in antecedent");
            let expected = match rule {
                RuleName::AndL1C => {
                    require!(ante.contains(a), "AndL1C conclusion must contain '{a}'");
                    ante.plus(b)
                }
                RuleName::AndL2C => {
                    require!(ante.contains(b), "AndL2C conclusion must contain '{b}'");
                    ante.plus(a)
                }
                _ => {
                    // for a principal F ∧ F the set-form premise carries a
                    // single copy of F
                    if a == b && premises[0].antecedent == ante.plus(a) {
                        ante.plus(a)
                    } else {
                        ante.plus(a).plus(b)
                    }
                }
            };
            premise_eq!(0, expected, goal);
            CheckVerdict::Valid
        }
        RuleName::OrLC => {
            check_arity!(2);
            let Annotation::Principal(p) = annotation else {
                return CheckVerdict::invalid("OrLC requires a principal annotation");
            };
            let Formula::Or(a, b) = p else {
                return CheckVerdict::invalid("OrLC principal must be a disjunction");
            };
            require!(ante.contains(p), "principal '{p}' not in antecedent");
            premise_eq!(0, ante.plus(a), goal);
            premise_eq!(1, ante.plus(b), goal);
            CheckVerdict::Valid
        }
        RuleName::ImpRW => {
            check_arity!(1);
            let Formula::Implies(a, b) = goal else {
                return CheckVerdict::invalid("ImpRW goal must be an implication");
            };
            require!(
                ante.contains(a),
                "ImpRW antecedent must already contain '{a}'"
            );
            premise_eq!(0, ante.clone(), b);
            CheckVerdict::Valid
        }
        RuleName::ImpLC => {
            check_arity!(2);
            let Annotation::Principal(p) = annotation else {
                return CheckVerdict::invalid("ImpLC requires a principal annotation");
            };
            let Formula::Implies(a, b) = p else {
                return CheckVerdict::invalid("ImpLC principal must be an implication");
            };
            require!(ante.contains(p), "principal '{p}' not in antecedent");
            premise_eq!(0, ante.clone(), a);
            premise_eq!(1, ante.plus(b), goal);
            CheckVerdict::Valid
        }
        RuleName::KI1W => {
            check_arity!(1);
            let Annotation::DeltaSplit(d1, d2) = annotation else {
                return CheckVerdict::invalid("KI1W requires a DeltaSplit annotation");
            };
            let Formula::Know(f) = goal else {
                return CheckVerdict::invalid("KI1W goal must be a K-formula");
            };
            require!(
                ante.includes(d1),
                "Delta1 not contained in the conclusion antecedent"
            );
            for body in d1.support().chain(d2.support()) {
                require!(
                    ante.contains(&Formula::know(body.clone())),
                    "Delta member '{body}' is not the body of a K-formula in the conclusion"
                );
            }
            for g in ante.support() {
                if let Formula::Know(body) = g {
                    require!(
                        d1.contains(body) || d2.contains(body),
                        "side condition violated: body of '{g}' missing from Delta"
                    );
                }
            }
            premise_eq!(0, ante.sum(d2), f);
            CheckVerdict::Valid
        }
        RuleName::KE => unreachable!("KE belongs to no calculus"),
    }
}

/// Checks every node of `t` against the rules of `cal`.
pub fn check_proof(cal: CalculusId, t: &ProofTree) -> CheckVerdict {
    let mut path = Vec::new();
    check_node(cal, t, &mut path)
}

fn check_node(cal: CalculusId, t: &ProofTree, path: &mut Vec<usize>) -> CheckVerdict {
    let premise_seqs: Vec<&Sequent> = t.premises.iter().map(|p| &p.conclusion).collect();
    match validate_instance(cal, t.rule, &t.conclusion, &premise_seqs, &t.annotation) {
        CheckVerdict::Valid => {}
        CheckVerdict::Invalid { reason, .. } => {
            return CheckVerdict::Invalid {
                path: path.clone(),
                reason,
            };
        }
    }
    for (i, p) in t.premises.iter().enumerate() {
        path.push(i);
        let v = check_node(cal, p, path);
        path.pop();
        if !v.is_valid() {
            return v;
        }
    }
    CheckVerdict::Valid
}

/// A concrete rule instance: conclusion, premises and annotation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleInstance {
    pub rule: RuleName,
    pub conclusion: Sequent,
    pub premises: Vec<Sequent>,
    pub annotation: Annotation,
}

impl RuleInstance {
    pub fn validate(&self, cal: CalculusId) -> CheckVerdict {
        let premises: Vec<&Sequent> = self.premises.iter().collect();
        validate_instance(cal, self.rule, &self.conclusion, &premises, &self.annotation)
    }
}

/// Enumerates all applicable monotone set-form instances of `IELG++` rules
/// with conclusion `s`, deterministically ordered: axioms, right
/// non-branching, left non-branching, K-introduction, branching, `(U)` last.
pub fn backward_instances(cal: CalculusId, s: &SetSequent) -> Vec<RuleInstance> {
    assert_eq!(
        cal,
        CalculusId::IelgPlusPlus,
        "backward enumeration is defined for ielg++ only"
    );
    let x = &s.antecedent;
    let goal = &s.goal;
    let conclusion = s.to_sequent();
    let seq = |ante: &FormulaSet, g: &Formula| -> Sequent {
        Sequent::new(ante.iter().cloned().collect(), g.clone())
    };
    let with = |ante: &FormulaSet, f: &Formula| -> FormulaSet {
        let mut out = ante.clone();
        out.insert(f.clone());
        out
    };
    let mut out = Vec::new();
    let mut push = |rule, premises: Vec<Sequent>, annotation| {
        out.push(RuleInstance {
            rule,
            conclusion: conclusion.clone(),
            premises,
            annotation,
        });
    };

    // axiom
    if goal.is_atomic() && x.contains(goal) {
        push(RuleName::Axiom, vec![], Annotation::Principal(goal.clone()));
    }

    // right non-branching
    match goal {
        Formula::Or(a, b) => {
            push(RuleName::OrR1, vec![seq(x, a)], Annotation::None);
            push(RuleName::OrR2, vec![seq(x, b)], Annotation::None);
        }
        Formula::Implies(a, b) => {
            if x.contains(a) {
                push(RuleName::ImpRW, vec![seq(x, b)], Annotation::None);
            } else {
                push(RuleName::ImpR, vec![seq(&with(x, a), b)], Annotation::None);
            }
        }
        _ => {}
    }

    // left non-branching
    for f in x {
        if let Formula::And(a, b) = f {
            let (rule, premise_ante) = match (x.contains(a), x.contains(b)) {
                (true, true) => continue, // would reproduce the conclusion
                (true, false) => (RuleName::AndL1C, with(x, b)),
                (false, true) => (RuleName::AndL2C, with(x, a)),
                (false, false) => (RuleName::AndLC, with(&with(x, a), b)),
            };
            push(
                rule,
                vec![seq(&premise_ante, goal)],
                Annotation::Principal(f.clone()),
            );
        }
    }

    // K-introduction with maximal Delta
    if let Formula::Know(f) = goal {
        let delta_all = k_prefix_set(x);
        let d1: Multiset = delta_all.iter().filter(|b| x.contains(b)).cloned().collect();
        let d2: Multiset = delta_all
            .iter()
            .filter(|b| !x.contains(b))
            .cloned()
            .collect();
        let mut premise_ante = x.clone();
        premise_ante.extend(delta_all.iter().cloned());
        if d1.is_empty() {
            push(
                RuleName::KI1,
                vec![seq(&premise_ante, f)],
                Annotation::Delta(d2),
            );
        } else {
            push(
                RuleName::KI1W,
                vec![seq(&premise_ante, f)],
                Annotation::DeltaSplit(d1, d2),
            );
        }
    }

    // branching
    if let Formula::And(a, b) = goal {
        push(
            RuleName::AndR,
            vec![seq(x, a), seq(x, b)],
            Annotation::None,
        );
    }
    for f in x {
        match f {
            Formula::Or(a, b) if !x.contains(a) && !x.contains(b) => {
                push(
                    RuleName::OrLC,
                    vec![seq(&with(x, a), goal), seq(&with(x, b), goal)],
                    Annotation::Principal(f.clone()),
                );
            }
            Formula::Implies(a, b) if !x.contains(b) => {
                push(
                    RuleName::ImpLC,
                    vec![seq(x, a), seq(&with(x, b), goal)],
                    Annotation::Principal(f.clone()),
                );
            }
            _ => {}
        }
    }

    // (U) last; skipped when the goal is already K_|_
    let kbot = Formula::know(Formula::Bottom);
    if goal != &kbot {
        push(RuleName::U, vec![seq(x, &kbot)], Annotation::None);
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }
    fn kp() -> Formula {
        Formula::know(p())
    }
    fn kq() -> Formula {
        Formula::know(q())
    }
    fn seq(ante: &[Formula], goal: Formula) -> Sequent {
        Sequent::new(ante.iter().cloned().collect(), goal)
    }

    #[test]
    fn axiom_atomic_principal_valid() {
        let v = validate_instance(
            CalculusId::IelgMinus,
            RuleName::Axiom,
            &seq(&[p()], p()),
            &[],
            &Annotation::Principal(p()),
        );
        assert!(v.is_valid(), "{v}");
    }

    #[test]
    fn axiom_rejects_non_atomic_principal() {
        let v = validate_instance(
            CalculusId::IelgMinus,
            RuleName::Axiom,
            &seq(&[kp()], kp()),
            &[],
            &Annotation::Principal(kp()),
        );
        assert!(!v.is_valid());
    }

    #[test]
    fn axiom_accepts_bottom_principal() {
        let v = validate_instance(
            CalculusId::IelgMinus,
            RuleName::Axiom,
            &seq(&[p(), Formula::Bottom], Formula::Bottom),
            &[],
            &Annotation::Principal(Formula::Bottom),
        );
        assert!(v.is_valid(), "{v}");
    }

    #[test]
    fn ki1_valid_with_maximal_delta() {
        let conclusion = seq(&[kq(), kp()], kp());
        let premise = seq(&[kq(), kp(), q(), p()], p());
        let delta: Multiset = [q(), p()].into_iter().collect();
        let v = validate_instance(
            CalculusId::IelgMinus,
            RuleName::KI1,
            &conclusion,
            &[&premise],
            &Annotation::Delta(delta),
        );
        assert!(v.is_valid(), "{v}");
    }

    #[test]
    fn ki1_side_condition_rejects_k_formula_in_gamma() {
        // Kr stays in Gamma because r is not in Delta
        let kr = Formula::know(Formula::var("r"));
        let conclusion = seq(&[kr.clone(), kq(), kp()], kp());
        let premise = seq(&[kr, kq(), kp(), q(), p()], p());
        let delta: Multiset = [q(), p()].into_iter().collect();
        let v = validate_instance(
            CalculusId::IelgMinus,
            RuleName::KI1,
            &conclusion,
            &[&premise],
            &Annotation::Delta(delta),
        );
        assert!(!v.is_valid());
    }

    #[test]
    fn check_two_node_ki1_proof() {
        // Kp, p |- p  (axiom)  then  (KI1)  Kp |- Kp
        let ax = ProofTree::axiom(seq(&[kp(), p()], p()), p());
        let t = ProofTree::node(
            RuleName::KI1,
            seq(&[kp()], kp()),
            Annotation::Delta(Multiset::singleton(p())),
            vec![ax],
        );
        assert!(check_proof(CalculusId::IelgMinus, &t).is_valid());
        assert_eq!(t.depth(), 2);
        assert_eq!(t.cut_count(), 0);
        assert!(t.is_monotone());
    }

    #[test]
    fn cut_not_in_minus() {
        let ax1 = ProofTree::axiom(seq(&[p()], p()), p());
        let ax2 = ProofTree::axiom(seq(&[p()], p()), p());
        let t = ProofTree::node(
            RuleName::Cut,
            seq(&[p()], p()),
            Annotation::CutFormula(p()),
            vec![ax1, ax2],
        );
        let v = check_proof(CalculusId::IelgMinus, &t);
        assert!(!v.is_valid());
        assert!(check_proof(CalculusId::Ielg, &t).is_valid());
    }

    #[test]
    fn kc_instance_is_monotone_but_andl_is_not() {
        // (KC) keeps every conclusion formula in the premise, so it is
        // monotone; plain (AndL) replaces the principal and is not
        let premise = ProofTree::axiom(seq(&[p(), kp()], p()), p());
        let t = ProofTree::node(
            RuleName::KC,
            seq(&[p()], p()),
            Annotation::Principal(p()),
            vec![premise],
        );
        assert!(check_proof(CalculusId::Ielg, &t).is_valid());
        assert!(t.is_monotone());

        let f = Formula::and(p(), q());
        let andl = ProofTree::node(
            RuleName::AndL,
            seq(&[f.clone()], p()),
            Annotation::Principal(f),
            vec![ProofTree::axiom(seq(&[p(), q()], p()), p())],
        );
        assert!(check_proof(CalculusId::IelgMinus, &andl).is_valid());
        assert!(!andl.is_monotone());
    }

    #[test]
    fn ki0_weakened_derivation_depth_three() {
        // |- p  would be unsound; use p |- p, then the KI1 simulation of KI0
        // shown with an explicit intermediate step has depth 3 when the
        // weakening premise is spelled out in ielg++ via KI1W.
        let ax = ProofTree::axiom(seq(&[kp(), p()], p()), p());
        let mid = ProofTree::node(
            RuleName::KI1W,
            seq(&[kp(), p()], kp()),
            Annotation::DeltaSplit(Multiset::singleton(p()), Multiset::new()),
            vec![ax],
        );
        let top = ProofTree::node(
            RuleName::KI1W,
            seq(&[kp()], Formula::know(kp())),
            Annotation::DeltaSplit(Multiset::new(), Multiset::singleton(p())),
            vec![mid],
        );
        assert!(check_proof(CalculusId::IelgPlusPlus, &top).is_valid());
        assert_eq!(top.depth(), 3);
    }

    #[test]
    fn backward_instances_conjunction_antecedent() {
        let s = SetSequent::new([Formula::and(p(), q())].into_iter().collect(), p());
        let instances = backward_instances(CalculusId::IelgPlusPlus, &s);
        let rules: Vec<RuleName> = instances.iter().map(|i| i.rule).collect();
        assert_eq!(rules, vec![RuleName::AndLC, RuleName::U]);
        let prem = &instances[0].premises[0];
        assert!(prem.antecedent.contains(&p()) && prem.antecedent.contains(&q()));
    }

    #[test]
    fn backward_instances_know_goal() {
        let s = SetSequent::new([kp()].into_iter().collect(), kp());
        let instances = backward_instances(CalculusId::IelgPlusPlus, &s);
        let rules: Vec<RuleName> = instances.iter().map(|i| i.rule).collect();
        assert_eq!(rules, vec![RuleName::KI1, RuleName::U]);
        assert_eq!(
            instances[0].premises[0],
            seq(&[kp(), p()], p())
        );
    }

    #[test]
    fn backward_instances_bottom_goal() {
        let s = SetSequent::new(FormulaSet::new(), Formula::Bottom);
        let instances = backward_instances(CalculusId::IelgPlusPlus, &s);
        assert_eq!(instances.len(), 1);
        assert_eq!(instances[0].rule, RuleName::U);
        assert_eq!(
            instances[0].premises[0].goal,
            Formula::know(Formula::Bottom)
        );
    }

    #[test]
    fn backward_instances_revalidate() {
        for text in ["|- Kp -> Kq", "Kp, p & q |- K(p | q)", "p -> q, Kp |- q | p"] {
            let s = Sequent::parse(text).unwrap().to_set();
            for inst in backward_instances(CalculusId::IelgPlusPlus, &s) {
                let v = inst.validate(CalculusId::IelgPlusPlus);
                assert!(v.is_valid(), "{text}: {} {v}", inst.rule);
            }
        }
    }

    #[test]
    fn subtree_lookup() {
        let ax = ProofTree::axiom(seq(&[kp(), p()], p()), p());
        let t = ProofTree::node(
            RuleName::KI1,
            seq(&[kp()], kp()),
            Annotation::Delta(Multiset::singleton(p())),
            vec![ax.clone()],
        );
        assert_eq!(t.subtree(&[0]), Some(&ax));
        assert_eq!(t.subtree(&[1]), None);
    }
}
