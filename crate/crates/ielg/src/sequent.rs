//! Multiset sequents `Gamma |- F`, set-sequents, and the size measure.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::formula::{Formula, FormulaSet, ParseError, Parser, Syntax};

/// A multiset of formulas stored as canonical-order mapping to multiplicity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Multiset(BTreeMap<Formula, usize>);

impl Multiset {
    pub fn new() -> Multiset {
        Multiset::default()
    }

    pub fn singleton(f: Formula) -> Multiset {
        let mut m = Multiset::new();
        m.insert(f);
        m
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of occurrences.
    pub fn len(&self) -> usize {
        self.0.values().sum()
    }

    pub fn multiplicity(&self, f: &Formula) -> usize {
        self.0.get(f).copied().unwrap_or(0)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.0.contains_key(f)
    }

    pub fn insert(&mut self, f: Formula) {
        *self.0.entry(f).or_insert(0) += 1;
    }

    pub fn insert_n(&mut self, f: Formula, n: usize) {
        if n > 0 {
            *self.0.entry(f).or_insert(0) += n;
        }
    }

    /// Removes one occurrence; returns false if absent.
    pub fn remove_one(&mut self, f: &Formula) -> bool {
        match self.0.entry(f.clone()) {
            Entry::Occupied(mut e) => {
                if *e.get() == 1 {
                    e.remove();
                } else {
                    *e.get_mut() -= 1;
                }
                true
            }
            Entry::Vacant(_) => false,
        }
    }

    /// Removes all occurrences of `f`.
    pub fn remove_all(&mut self, f: &Formula) -> usize {
        self.0.remove(f).unwrap_or(0)
    }

    /// Multiset sum.
    pub fn sum(&self, other: &Multiset) -> Multiset {
        let mut out = self.clone();
        for (f, &n) in &other.0 {
            out.insert_n(f.clone(), n);
        }
        out
    }

    pub fn plus(&self, f: &Formula) -> Multiset {
        let mut out = self.clone();
        out.insert(f.clone());
        out
    }

    /// Multiset difference; `None` if `other` is not contained in `self`.
    pub fn checked_sub(&self, other: &Multiset) -> Option<Multiset> {
        let mut out = self.clone();
        for (f, &n) in &other.0 {
            let have = out.multiplicity(f);
            if have < n {
                return None;
            }
            if have == n {
                out.0.remove(f);
            } else {
                *out.0.get_mut(f).unwrap() -= n;
            }
        }
        Some(out)
    }

    pub fn minus_one(&self, f: &Formula) -> Option<Multiset> {
        let mut out = self.clone();
        if out.remove_one(f) {
            Some(out)
        } else {
            None
        }
    }

    /// `other ⊆ self` as multisets.
    pub fn includes(&self, other: &Multiset) -> bool {
        other.0.iter().all(|(f, &n)| self.multiplicity(f) >= n)
    }

    /// `set(other) ⊆ set(self)`.
    pub fn includes_support(&self, other: &Multiset) -> bool {
        other.0.keys().all(|f| self.contains(f))
    }

    /// Distinct members in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &Formula> {
        self.0.keys()
    }

    /// (formula, multiplicity) pairs in canonical order.
    pub fn counts(&self) -> impl Iterator<Item = (&Formula, usize)> {
        self.0.iter().map(|(f, &n)| (f, n))
    }

    /// Occurrences with repetition, canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.0
            .iter()
            .flat_map(|(f, &n)| std::iter::repeat(f).take(n))
    }

    pub fn support_set(&self) -> FormulaSet {
        self.0.keys().cloned().collect()
    }

    pub fn is_duplicate_free(&self) -> bool {
        self.0.values().all(|&n| n == 1)
    }

    /// True when no member has the form `KG`.
    pub fn is_know_free(&self) -> bool {
        self.0.keys().all(|f| !f.is_know())
    }

    /// The K-prefixed image: `KF1,...,KFn` for members `F1,...,Fn`.
    pub fn know_image(&self) -> Multiset {
        let mut out = Multiset::new();
        for (f, n) in self.counts() {
            out.insert_n(Formula::know(f.clone()), n);
        }
        out
    }
}

impl FromIterator<Formula> for Multiset {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Multiset {
        let mut m = Multiset::new();
        for f in iter {
            m.insert(f);
        }
        m
    }
}

/// `{G : KG ∈ x}` — bodies of the K-formulas of `x` (single unwrap).
pub fn k_prefix_set(x: &FormulaSet) -> FormulaSet {
    x.iter()
        .filter_map(|f| match f {
            Formula::Know(b) => Some((**b).clone()),
            _ => None,
        })
        .collect()
}

/// A sequent `Gamma |- F` with a multiset antecedent.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Sequent {
    pub antecedent: Multiset,
    pub goal: Formula,
}

/// A sequent whose antecedent is duplicate-free.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SetSequent {
    pub antecedent: FormulaSet,
    pub goal: Formula,
}

impl Sequent {
    pub fn new(antecedent: Multiset, goal: Formula) -> Sequent {
        Sequent { antecedent, goal }
    }

    pub fn from_goal(goal: Formula) -> Sequent {
        Sequent::new(Multiset::new(), goal)
    }

    /// Collapses the antecedent to its support.
    pub fn to_set(&self) -> SetSequent {
        SetSequent {
            antecedent: self.antecedent.support_set(),
            goal: self.goal.clone(),
        }
    }

    /// Sum of the lengths of all antecedent occurrences and the goal.
    pub fn size(&self) -> usize {
        self.antecedent
            .counts()
            .map(|(f, n)| n * f.length())
            .sum::<usize>()
            + self.goal.length()
    }

    /// `F1, F2 |- G`; `|- G` for an empty antecedent.
    pub fn parse(text: &str) -> Result<Sequent, ParseError> {
        let mut p = Parser::new(text);
        let mut antecedent = Multiset::new();
        p.skip_ws();
        if !p.eat_turnstile() {
            loop {
                antecedent.insert(p.parse_implies()?);
                p.skip_ws();
                if p.eat_comma() {
                    continue;
                }
                if p.eat_turnstile() {
                    break;
                }
                return p.parse_err("expected ',' or '|-'");
            }
        }
        let goal = p.parse_implies()?;
        if !p.at_end() {
            return p.parse_err("unexpected trailing input");
        }
        Ok(Sequent { antecedent, goal })
    }

    pub fn render(&self, syntax: Syntax) -> String {
        let sep = match syntax {
            Syntax::Latex => " \\Rightarrow ",
            _ => " |- ",
        };
        let mut parts: Vec<String> = Vec::new();
        for f in self.antecedent.iter() {
            parts.push(f.render(syntax));
        }
        if parts.is_empty() {
            format!("{}{}", sep.trim_start(), self.goal.render(syntax))
        } else {
            format!("{}{}{}", parts.join(", "), sep, self.goal.render(syntax))
        }
    }
}

impl SetSequent {
    pub fn new(antecedent: FormulaSet, goal: Formula) -> SetSequent {
        SetSequent { antecedent, goal }
    }

    /// The same sequent with all multiplicities 1.
    pub fn to_sequent(&self) -> Sequent {
        Sequent {
            antecedent: self.antecedent.iter().cloned().collect(),
            goal: self.goal.clone(),
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Syntax::Ascii))
    }
}

impl fmt::Display for SetSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_sequent().fmt(f)
    }
}

impl Parser<'_> {
    fn eat_turnstile(&mut self) -> bool {
        self.skip_ws();
        self.eat_str("|-") || self.eat_str("\u{21d2}")
    }

    fn eat_comma(&mut self) -> bool {
        self.skip_ws();
        self.eat_str(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::var("p")
    }
    fn q() -> Formula {
        Formula::var("q")
    }
    fn kp() -> Formula {
        Formula::know(p())
    }

    #[test]
    fn to_set_collapses_duplicates() {
        let s = Sequent::new(
            [p(), p(), q()].into_iter().collect(),
            Formula::var("r"),
        );
        let t = s.to_set();
        assert_eq!(t.antecedent, [p(), q()].into_iter().collect());
        assert_eq!(t.goal, Formula::var("r"));
    }

    #[test]
    fn to_set_identity_on_sets() {
        let s = Sequent::from_goal(p());
        let t = s.to_set();
        assert!(t.antecedent.is_empty());
        assert_eq!(t.goal, p());
    }

    #[test]
    fn to_set_mixed() {
        let s = Sequent::new([kp(), p(), kp()].into_iter().collect(), kp());
        let t = s.to_set();
        assert_eq!(t.antecedent, [kp(), p()].into_iter().collect());
    }

    #[test]
    fn size_measure() {
        assert_eq!(Sequent::new(Multiset::singleton(kp()), kp()).size(), 4);
        assert_eq!(Sequent::from_goal(p()).size(), 1);
        let s = Sequent::new(
            [p(), p()].into_iter().collect(),
            Formula::and(p(), p()),
        );
        assert_eq!(s.size(), 5);
    }

    #[test]
    fn k_prefix_set_strips_one_level() {
        let x: FormulaSet = [kp(), q(), Formula::know(Formula::implies(p(), q()))]
            .into_iter()
            .collect();
        let expected: FormulaSet = [p(), Formula::implies(p(), q())].into_iter().collect();
        assert_eq!(k_prefix_set(&x), expected);

        assert_eq!(k_prefix_set(&FormulaSet::new()), FormulaSet::new());

        let x: FormulaSet = [Formula::know(Formula::know(Formula::Bottom))]
            .into_iter()
            .collect();
        let expected: FormulaSet = [Formula::know(Formula::Bottom)].into_iter().collect();
        assert_eq!(k_prefix_set(&x), expected);
    }

    #[test]
    fn parse_and_render_sequents() {
        let s = Sequent::parse("p, p, q |- r").unwrap();
        assert_eq!(s.antecedent.multiplicity(&p()), 2);
        assert_eq!(s.render(Syntax::Ascii), "p, p, q |- r");

        let s = Sequent::parse("|- K p -> p").unwrap();
        assert!(s.antecedent.is_empty());
        assert_eq!(s.goal, Formula::implies(kp(), p()));

        assert!(Sequent::parse("p, |- q").is_err());
        assert!(Sequent::parse("p q").is_err());
    }

    #[test]
    fn size_of_set_collapse_never_grows() {
        let s = Sequent::new([p(), p(), q()].into_iter().collect(), q());
        assert!(s.to_set().to_sequent().size() <= s.size());
        let t = Sequent::new([p(), q()].into_iter().collect(), q());
        assert_eq!(t.to_set().to_sequent().size(), t.size());
    }

    #[test]
    fn multiset_arithmetic() {
        let a: Multiset = [p(), p(), q()].into_iter().collect();
        let b: Multiset = [p(), q()].into_iter().collect();
        assert!(a.includes(&b));
        assert!(!b.includes(&a));
        assert_eq!(a.checked_sub(&b).unwrap(), Multiset::singleton(p()));
        assert_eq!(b.checked_sub(&a), None);
        assert_eq!(a.len(), 3);
        assert!(!a.is_duplicate_free());
        assert!(b.is_duplicate_free());
        let k: Multiset = [p(), q()].into_iter().collect();
        assert_eq!(
            k.know_image(),
            [kp(), Formula::know(q())].into_iter().collect()
        );
    }
}
