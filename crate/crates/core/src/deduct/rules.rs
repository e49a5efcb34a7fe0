//! Rule library: parsing and validation.
//!
//! One rule per line:
//!
//! ```text
//! id: antecedent, antecedent => consequent ! nondegenerate, nondegenerate
//! ```
//!
//! Predicates use DSL syntax with point names acting as variables. The part
//! after `!` lists predicates that must be numerically false for the rule to
//! fire. `#` starts a comment.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::DeductError;
use crate::dsl::{parse_predicate_list, PredicateKind};

/// A predicate over rule variables (indices into [`Rule::vars`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub kind: PredicateKind,
    pub args: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub vars: Vec<String>,
    pub antecedents: Vec<Pattern>,
    pub consequent: Pattern,
    pub nondegeneracy: Vec<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
}

const DEFAULT_RULES: &str = include_str!("../../rules/default.rules");

impl RuleSet {
    /// The built-in library.
    pub fn default_rules() -> RuleSet {
        RuleSet::parse(DEFAULT_RULES).expect("built-in rule file is valid")
    }

    pub fn parse(text: &str) -> Result<RuleSet, DeductError> {
        let mut rules = Vec::new();
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let rule = parse_rule(line, lineno + 1)?;
            if seen.insert(rule.id.clone(), ()).is_some() {
                return Err(DeductError::RuleSyntax { line: lineno + 1, message: alloc::format!("duplicate id {}", rule.id) });
            }
            rules.push(rule);
        }
        Ok(RuleSet { rules })
    }

    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

fn parse_rule(line: &str, lineno: usize) -> Result<Rule, DeductError> {
    let err = |message: String| DeductError::RuleSyntax { line: lineno, message };
    let (id, body) = line.split_once(':').ok_or_else(|| err("missing 'id:'".into()))?;
    let id = id.trim();
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(err(alloc::format!("bad rule id '{id}'")));
    }
    let (ante, rest) = body.split_once("=>").ok_or_else(|| err("missing '=>'".into()))?;
    let (cons, ndg) = match rest.split_once('!') {
        Some((c, n)) => (c, n),
        None => (rest, ""),
    };
    let parse = |s: &str| parse_predicate_list(s).map_err(|e| err(e.to_string()));
    let ante = parse(ante)?;
    let cons = parse(cons)?;
    let ndg = parse(ndg)?;
    if ante.is_empty() {
        return Err(err("rule has no antecedents".into()));
    }
    if cons.len() != 1 {
        return Err(err("rule needs exactly one consequent".into()));
    }
    let mut vars: Vec<String> = Vec::new();
    let mut pattern = |p: &crate::dsl::Predicate, may_add: bool| -> Result<Pattern, DeductError> {
        let mut args = Vec::new();
        for a in &p.args {
            let pos = match vars.iter().position(|v| v == a.as_str()) {
                Some(i) => i,
                None if may_add => {
                    vars.push(a.to_string());
                    vars.len() - 1
                }
                None => return Err(err(alloc::format!("variable '{a}' does not occur in the antecedents"))),
            };
            args.push(pos);
        }
        Ok(Pattern { kind: p.kind, args })
    };
    let antecedents = ante.iter().map(|p| pattern(p, true)).collect::<Result<Vec<_>, _>>()?;
    let consequent = pattern(&cons[0], false)?;
    let nondegeneracy = ndg.iter().map(|p| pattern(p, false)).collect::<Result<Vec<_>, _>>()?;
    Ok(Rule { id: id.to_string(), vars, antecedents, consequent, nondegeneracy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rule_line() {
        let rs = RuleSet::parse("# c\nmidsegment: midp m a b, midp n a c => para m n b c ! coll a b c\n").unwrap();
        let r = &rs.rules[0];
        assert_eq!(r.id, "midsegment");
        assert_eq!(r.vars, ["m", "a", "b", "n", "c"]);
        assert_eq!(r.consequent, Pattern { kind: PredicateKind::Para, args: alloc::vec![0, 3, 2, 4] });
        assert_eq!(r.nondegeneracy.len(), 1);
    }

    #[test]
    fn consequent_variables_must_be_bound() {
        let e = RuleSet::parse("bad: coll a b c => coll a b d").unwrap_err();
        assert!(matches!(e, DeductError::RuleSyntax { line: 1, .. }));
    }

    #[test]
    fn default_library_loads() {
        let rs = RuleSet::default_rules();
        assert!(rs.rules.len() >= 40, "{}", rs.rules.len());
        assert!(rs.get("power_of_point").is_some());
        assert!(rs.get("menelaus_midpoint").is_some());
    }
}
