//! Structured proof documents: JSON (de)serialization, plain-text and LaTeX
//! rendering of proof trees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::{Annotation, ProofTree, RuleName};
use crate::formula::{Formula, Syntax};
use crate::sequent::{Multiset, Sequent};

/// One proof-tree node in the document format. Formulas and sequents are
/// stored in the ascii concrete syntax.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ProofDoc {
    pub conclusion: String,
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<AnnotationDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<ProofDoc>,
}

/// Annotation payload; exactly one field is populated per node.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
pub struct AnnotationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Formula(#[from] crate::formula::ParseError),
    #[error("{0}")]
    BadRule(String),
    #[error("annotation mismatch for rule {rule}: {detail}")]
    BadAnnotation { rule: String, detail: String },
}

impl ProofDoc {
    pub fn from_tree(t: &ProofTree) -> ProofDoc {
        ProofDoc {
            conclusion: t.conclusion.render(Syntax::Ascii),
            rule: t.rule.as_str().to_string(),
            annotation: annotation_doc(&t.annotation),
            premises: t.premises.iter().map(ProofDoc::from_tree).collect(),
        }
    }

    pub fn to_tree(&self) -> Result<ProofTree, DocumentError> {
        let conclusion = Sequent::parse(&self.conclusion)?;
        let rule: RuleName = self.rule.parse().map_err(DocumentError::BadRule)?;
        let annotation = parse_annotation(&self.rule, self.annotation.as_ref())?;
        let premises = self
            .premises
            .iter()
            .map(ProofDoc::to_tree)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProofTree {
            conclusion,
            rule,
            annotation,
            premises,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("proof document serialization")
    }

    pub fn from_json(text: &str) -> Result<ProofDoc, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn formulas(ms: &Multiset) -> Vec<String> {
    ms.iter().map(|f| f.render(Syntax::Ascii)).collect()
}

fn annotation_doc(ann: &Annotation) -> Option<AnnotationDoc> {
    let mut doc = AnnotationDoc::default();
    match ann {
        Annotation::None => return None,
        Annotation::Principal(f) => doc.principal = Some(f.render(Syntax::Ascii)),
        Annotation::CutFormula(f) => doc.cut_formula = Some(f.render(Syntax::Ascii)),
        Annotation::Delta(d) => doc.delta = Some(formulas(d)),
        Annotation::DeltaSplit(d1, d2) => {
            doc.delta1 = Some(formulas(d1));
            doc.delta2 = Some(formulas(d2));
        }
        Annotation::Gamma2(g) => doc.gamma2 = Some(formulas(g)),
        Annotation::Contract(d) => doc.contract = Some(formulas(d)),
    }
    Some(doc)
}

fn parse_multiset(items: &[String]) -> Result<Multiset, DocumentError> {
    let mut out = Multiset::new();
    for item in items {
        out.insert(Formula::parse(item)?);
    }
    Ok(out)
}

fn parse_annotation(
    rule: &str,
    doc: Option<&AnnotationDoc>,
) -> Result<Annotation, DocumentError> {
    let Some(doc) = doc else {
        return Ok(Annotation::None);
    };
    let mismatch = |detail: &str| DocumentError::BadAnnotation {
        rule: rule.to_string(),
        detail: detail.to_string(),
    };
    if let Some(f) = &doc.principal {
        return Ok(Annotation::Principal(Formula::parse(f)?));
    }
    if let Some(f) = &doc.cut_formula {
        return Ok(Annotation::CutFormula(Formula::parse(f)?));
    }
    if let Some(d) = &doc.delta {
        return Ok(Annotation::Delta(parse_multiset(d)?));
    }
    if doc.delta1.is_some() || doc.delta2.is_some() {
        let d1 = doc
            .delta1
            .as_ref()
            .ok_or_else(|| mismatch("delta1 missing"))?;
        let d2 = doc
            .delta2
            .as_ref()
            .ok_or_else(|| mismatch("delta2 missing"))?;
        return Ok(Annotation::DeltaSplit(
            parse_multiset(d1)?,
            parse_multiset(d2)?,
        ));
    }
    if let Some(g) = &doc.gamma2 {
        return Ok(Annotation::Gamma2(parse_multiset(g)?));
    }
    if let Some(d) = &doc.contract {
        return Ok(Annotation::Contract(parse_multiset(d)?));
    }
    Ok(Annotation::None)
}

/// Indented plain-text rendering, premises above their conclusion.
pub fn render_text(t: &ProofTree) -> String {
    let mut out = String::new();
    text_lines(t, 0, &mut out);
    out
}

fn text_lines(t: &ProofTree, indent: usize, out: &mut String) {
    for p in &t.premises {
        text_lines(p, indent + 1, out);
    }
    out.push_str(&"  ".repeat(indent));
    out.push_str(&format!(
        "[{}] {}\n",
        t.rule,
        t.conclusion.render(Syntax::Ascii)
    ));
}

/// LaTeX export using bussproofs macros, one inference figure per node.
pub fn render_latex(t: &ProofTree) -> String {
    let mut out = String::from("\\begin{prooftree}\n");
    latex_node(t, &mut out);
    out.push_str("\\end{prooftree}\n");
    out
}

fn latex_node(t: &ProofTree, out: &mut String) {
    for p in &t.premises {
        latex_node(p, out);
    }
    let seq = t.conclusion.render(Syntax::Latex);
    let label = latex_label(t.rule);
    match t.premises.len() {
        0 => {
            out.push_str(&format!("\\AxiomC{{}}\n"));
            out.push_str(&format!("\\RightLabel{{{label}}}\n"));
            out.push_str(&format!("\\UnaryInfC{{${seq}$}}\n"));
        }
        1 => {
            out.push_str(&format!("\\RightLabel{{{label}}}\n"));
            out.push_str(&format!("\\UnaryInfC{{${seq}$}}\n"));
        }
        2 => {
            out.push_str(&format!("\\RightLabel{{{label}}}\n"));
            out.push_str(&format!("\\BinaryInfC{{${seq}$}}\n"));
        }
        n => {
            // no rule has more than two premises
            out.push_str(&format!("\\RightLabel{{{label}}}\n"));
            out.push_str(&format!("% {n} premises\n\\UnaryInfC{{${seq}$}}\n"));
        }
    }
}

fn latex_label(rule: RuleName) -> &'static str {
    match rule {
        RuleName::Axiom => "$Ax$",
        RuleName::KBotAxiom => "$K\\bot$",
        RuleName::AndL => "$(\\wedge\\Rightarrow)$",
        RuleName::AndR => "$(\\Rightarrow\\wedge)$",
        RuleName::OrL => "$(\\vee\\Rightarrow)$",
        RuleName::OrR1 => "$(\\Rightarrow\\vee)_1$",
        RuleName::OrR2 => "$(\\Rightarrow\\vee)_2$",
        RuleName::ImpL => "$(\\to\\Rightarrow)$",
        RuleName::ImpR => "$(\\Rightarrow\\to)$",
        RuleName::KI0 => "$(KI_0)$",
        RuleName::KC => "$(KC)$",
        RuleName::KE => "$(KE)$",
        RuleName::Cut => "$(Cut)$",
        RuleName::KI1 => "$(KI_1)$",
        RuleName::U => "$(U)$",
        RuleName::C => "$(C)$",
        RuleName::AndL1C => "$(\\wedge_1^C\\Rightarrow)$",
        RuleName::AndL2C => "$(\\wedge_2^C\\Rightarrow)$",
        RuleName::AndLC => "$(\\wedge^C\\Rightarrow)$",
        RuleName::OrLC => "$(\\vee^C\\Rightarrow)$",
        RuleName::ImpRW => "$(\\Rightarrow\\to^W)$",
        RuleName::ImpLC => "$(\\to^C\\Rightarrow)$",
        RuleName::KI1W => "$(KI_1^W)$",
        RuleName::KI => "$(KI)$",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{check_proof, CalculusId};
    use crate::formula::Formula;

    fn sample_tree() -> ProofTree {
        let p = Formula::var("p");
        let ax = ProofTree::axiom(
            Sequent::parse("Kp, p |- p").unwrap(),
            p.clone(),
        );
        ProofTree::node(
            RuleName::KI1,
            Sequent::parse("Kp |- Kp").unwrap(),
            Annotation::Delta(Multiset::singleton(p)),
            vec![ax],
        )
    }

    #[test]
    fn json_round_trip() {
        let t = sample_tree();
        let doc = ProofDoc::from_tree(&t);
        let json = doc.to_json();
        let back = ProofDoc::from_json(&json).unwrap().to_tree().unwrap();
        assert_eq!(back, t);
        assert!(check_proof(CalculusId::IelgMinus, &back).is_valid());
    }

    #[test]
    fn latex_contains_one_figure_per_node() {
        let t = sample_tree();
        let latex = render_latex(&t);
        assert_eq!(latex.matches("InfC").count(), 2);
        assert!(latex.contains("(KI_1)"));
    }

    #[test]
    fn text_rendering_lists_rules() {
        let t = sample_tree();
        let text = render_text(&t);
        assert!(text.contains("[Axiom] p, Kp |- p"));
        assert!(text.contains("[KI1] Kp |- Kp"));
    }

    #[test]
    fn bad_rule_name_rejected() {
        let doc = ProofDoc {
            conclusion: "p |- p".into(),
            rule: "Bogus".into(),
            annotation: None,
            premises: vec![],
        };
        assert!(doc.to_tree().is_err());
    }
}
