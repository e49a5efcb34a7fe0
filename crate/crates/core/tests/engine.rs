use std::collections::BTreeSet;

use geoproof_core::deduct::DEFAULT_BUDGET;
use geoproof_core::diagram::DiagramError;
use geoproof_core::dsl::{parse_action, parse_problem, parse_statements, Predicate};
use geoproof_core::engine::{
    exhaust_solve, start_session, used_aux, EngineError, Feedback, SessionConfig, SessionState, Status, StepKind,
};
use proptest::prelude::*;

// Not provable without the foot of a on bd.
const KITE: &str = "a b c = triangle; d = reflect b a c; g = midpoint a c ? cong b g d g";
const KITE_AUX: &str = "e = foot a b d";

fn build(src: &str, seed: u64) -> (SessionState, Feedback) {
    let a = parse_action(&format!("<build>{src}</build>")).unwrap();
    start_session(&a, seed, &SessionConfig::default()).unwrap()
}

fn pred(s: &str) -> String {
    s.parse::<Predicate>().unwrap().canonical().to_string()
}

fn canon(list: &[String]) -> BTreeSet<String> {
    list.iter().map(|s| pred(s)).collect()
}

#[test]
fn build_lists_initial_facts() {
    let (s, fb) = build("a = free; b = free; c = on_circle a b ? eqangle b a b c c b c a", 0);
    assert_eq!(fb.turn, 1);
    assert_eq!(s.turn, 1);
    // Goal is one rule away from the premise, so the build already solves it.
    assert_eq!(fb.status, Status::SessionSolved);
    assert!(canon(&fb.detail.facts).contains(&pred("cong a b a c")));
    assert!(fb.detail.residual.unwrap() < 1e-8);
    assert_eq!(fb.known.len(), 1);
}

#[test]
fn open_goal_leaves_session_running() {
    let (s, fb) = build(KITE, 0);
    assert_eq!(fb.status, Status::Ok);
    assert!(fb.known.is_empty());
    assert!(!s.is_solved());
}

#[test]
fn infeasible_build_is_an_error() {
    let a = parse_action("<build>a = free; b = free; c = on_segment a b, on_circle a b ? coll a b c</build>").unwrap();
    let e = start_session(&a, 0, &SessionConfig::default()).unwrap_err();
    assert!(matches!(e, EngineError::Diagram(DiagramError::InfeasibleConfiguration(_))), "{e:?}");
}

#[test]
fn first_action_must_be_build() {
    let a = parse_action("<propose>coll a b c</propose>").unwrap();
    assert_eq!(start_session(&a, 0, &SessionConfig::default()).unwrap_err(), EngineError::NotBuild);
}

#[test]
fn add_then_propose_solves() {
    let (mut s, _) = build(KITE, 7);
    let fb = s.step_text(&format!("<add>{KITE_AUX}</add>")).unwrap();
    assert_eq!((fb.turn, fb.status), (2, Status::Ok));
    assert!(!fb.detail.facts.is_empty());
    let fb = s.step_text("<propose>cong b g d g</propose>").unwrap();
    assert_eq!((fb.turn, fb.status), (3, Status::SessionSolved));
    assert!(fb.detail.proof_length.unwrap() >= 1);
    assert_eq!(fb.known, [pred("cong b g d g")]);
    assert_eq!(s.step_text("<propose>coll a g c</propose>").unwrap_err(), EngineError::Solved);

    let doc = s.extract_proof().unwrap();
    assert_eq!(doc.aux_used, [KITE_AUX]);
    assert!(doc.aux_unused.is_empty());
    assert!(doc.proof_length >= 1);
}

#[test]
fn unused_aux_is_reported_separately() {
    let (mut s, _) = build(KITE, 7);
    s.step_text("<add>z = midpoint a b</add>").unwrap();
    s.step_text(&format!("<add>{KITE_AUX}</add>")).unwrap();
    s.step_text("<propose>cong b g d g</propose>").unwrap();
    let doc = s.extract_proof().unwrap();
    // Oracle: an aux statement is used iff its point occurs in some proof step,
    // or a used statement refers to it.
    let mut used: BTreeSet<String> = BTreeSet::new();
    for st in &doc.steps {
        for p in st.fact.split_whitespace().skip(1) {
            used.insert(p.to_string());
        }
    }
    for (text, want) in [("z = midpoint a b", false), (KITE_AUX, true)] {
        let point = text.split_whitespace().next().unwrap();
        assert_eq!(used.contains(point), want, "{text}");
        assert_eq!(doc.aux_used.iter().any(|a| a == text), want);
        assert_eq!(doc.aux_unused.iter().any(|a| a == text), !want);
    }
}

#[test]
fn proof_document_is_consistent() {
    let (mut s, _) = build(KITE, 3);
    s.step_text(&format!("<add>{KITE_AUX}</add>")).unwrap();
    s.step_text("<propose>cong b g d g</propose>").unwrap();
    let doc = s.extract_proof().unwrap();
    let premises: BTreeSet<String> = s
        .problem
        .premises()
        .iter()
        .chain(s.aux.iter().flat_map(|a| a.premises()).collect::<Vec<_>>().iter())
        .map(|p| p.canonical().to_string())
        .collect();
    for (i, st) in doc.steps.iter().enumerate() {
        assert!(st.from.iter().all(|&j| j < i));
        if st.kind == StepKind::Premise {
            assert!(premises.contains(&pred(&st.fact)), "{} is not a premise", st.fact);
        } else {
            assert!(!st.from.is_empty());
        }
    }
    let counted = doc.steps.iter().filter(|st| matches!(st.kind, StepKind::Rule | StepKind::Algebra)).count();
    assert!(doc.proof_length <= counted);
    let text = doc.to_string();
    assert!(text.contains(KITE_AUX));
}

#[test]
fn proposing_a_premise_has_length_zero() {
    let (mut s, _) = build(KITE, 0);
    let fb = s.step_text("<propose>midp g a c</propose>").unwrap();
    assert_eq!(fb.status, Status::Proven);
    assert_eq!(fb.detail.proof_length, Some(0));
    assert_eq!(fb.known, [pred("midp g a c")]);
}

#[test]
fn proposing_a_false_fact_is_not_proven() {
    let (mut s, _) = build(KITE, 0);
    let fb = s.step_text("<propose>cong a b a c</propose>").unwrap();
    assert_eq!(fb.status, Status::NotProven);
    assert!(fb.known.is_empty());
}

#[test]
fn double_point_add_reports_coincidence() {
    let (mut s, _) = build("a b c = triangle; o = circumcenter a b c; m = midpoint b c ? cong a b a c", 0);
    let fb = s.step_text("<add>!x = foot o b c</add>").unwrap();
    assert_eq!(fb.status, Status::Ok);
    assert_eq!(canon(&fb.detail.coincident), BTreeSet::from([pred("idc m x")]));
    assert!(canon(&fb.detail.facts).contains(&pred("idc m x")));
}

#[test]
fn failed_construction_leaves_state_unchanged() {
    let (mut s, _) = build(KITE, 0);
    let before = (s.factbase.len(), s.aux.len(), s.diagram.len());
    let fb = s.step_text("<add>x = on_segment a b, on_circle a b</add>").unwrap();
    assert_eq!(fb.status, Status::ConstructionFailed);
    assert_eq!(fb.turn, 2);
    assert_eq!(before, (s.factbase.len(), s.aux.len(), s.diagram.len()));
}

#[test]
fn bad_actions_use_a_turn() {
    let (mut s, _) = build(KITE, 0);
    for (i, raw) in ["no tags", "<add>x = midpoint a q</add>", "<build>a = free ? coll a a a</build>", "<add>a = free</add>"]
        .iter()
        .enumerate()
    {
        let fb = s.step_text(raw).unwrap();
        assert_eq!(fb.status, Status::Error, "{raw}");
        assert!(fb.detail.error.is_some());
        assert_eq!(fb.turn, i as u32 + 2);
    }
    assert!(s.aux.is_empty());
}

#[test]
fn turn_limit_is_enforced() {
    let a = parse_action(&format!("<build>{KITE}</build>")).unwrap();
    let cfg = SessionConfig { max_turns: 3, ..SessionConfig::default() };
    let (mut s, _) = start_session(&a, 0, &cfg).unwrap();
    s.step_text("<propose>coll a g c</propose>").unwrap();
    s.step_text("<propose>coll a g c</propose>").unwrap();
    assert_eq!(s.step_text("<propose>coll a g c</propose>").unwrap_err(), EngineError::TurnLimitExceeded(3));
    assert_eq!(s.turn, 3);
}

#[test]
fn extract_before_solving_fails() {
    let (mut s, _) = build(KITE, 0);
    assert_eq!(s.extract_proof().unwrap_err(), EngineError::NotSolved);
}

#[test]
fn sessions_are_deterministic() {
    let script = ["<add>z = midpoint a b</add>", "<propose>para z g b c</propose>", "<add>e = foot a b d</add>", "<propose>cong b g d g</propose>"];
    let run = |seed| {
        let (mut s, first) = build(KITE, seed);
        let mut out = vec![first];
        out.extend(script.iter().map(|r| s.step_text(r).unwrap()));
        out
    };
    assert_eq!(run(11), run(11));
}

#[test]
fn checkpoint_round_trip() {
    let cfg = SessionConfig::default();
    let (mut s, _) = build(KITE, 5);
    s.step_text("<add>z = midpoint a b</add>").unwrap();
    s.step_text("<propose>para z g b c</propose>").unwrap();
    let cp = s.checkpoint();
    let mut r = SessionState::resume(&cp, &cfg).unwrap();
    assert_eq!(r.turn, s.turn);
    assert_eq!(r.known(), s.known());
    assert_eq!(r.checkpoint(), cp);
    for raw in [&format!("<add>{KITE_AUX}</add>") as &str, "<propose>cong b g d g</propose>"] {
        assert_eq!(s.step_text(raw).unwrap(), r.step_text(raw).unwrap());
    }
    let mut bad = cp.clone();
    bad.proven.push("cong a b a c".into());
    assert!(matches!(SessionState::resume(&bad, &cfg), Err(EngineError::Checkpoint(_))));
}

#[test]
fn exhaust_solve_fixture_and_failures() {
    let p = parse_problem("a b c = triangle; m = midpoint a b; n = midpoint a c ? para m n b c").unwrap();
    let doc = exhaust_solve(&p, 0, DEFAULT_BUDGET).unwrap();
    assert!(doc.proof_length >= 1);
    assert!(doc.aux_used.is_empty());

    let p = parse_problem("a b c = triangle; m = midpoint a b ? cong a c b c").unwrap();
    assert!(matches!(exhaust_solve(&p, 0, DEFAULT_BUDGET), Err(EngineError::NotProven(_))));

    let p = parse_problem(KITE).unwrap();
    assert!(matches!(exhaust_solve(&p, 0, DEFAULT_BUDGET), Err(EngineError::NotProven(_))));
    assert_eq!(exhaust_solve(&p, 0, 0).unwrap_err(), EngineError::BudgetExceeded);
}

#[test]
fn used_aux_follows_references() {
    let p = parse_problem(KITE).unwrap();
    let aux = parse_statements("z = midpoint a b; y = midpoint z g; e = foot a b d").unwrap();
    let mut full = p.clone();
    full.constructions.extend(aux.iter().cloned());
    let mut s = SessionState::resume(
        &geoproof_core::engine::Checkpoint {
            problem: full.to_string(),
            seed: 0,
            max_turns: 10,
            aux: vec![],
            proven: vec![],
            turn: 1,
        },
        &SessionConfig::default(),
    )
    .unwrap();
    let dag = s.factbase.prove(&"cong b g d g".parse().unwrap()).unwrap();
    let used = used_aux(&aux, &dag);
    assert!(used.contains(&2));
    assert!(!used.contains(&1) || used.contains(&0), "a used statement's references are used");
}

const POOL: &[&str] = &[
    "<add>z = midpoint a b</add>",
    "<add>e = foot a b d</add>",
    "<add>o = circumcenter a b c</add>",
    "<propose>para z g b c</propose>",
    "<propose>cong b g d g</propose>",
    "<propose>cong a b a d</propose>",
    "<propose>cong a b b c</propose>",
    "<propose>coll a g c</propose>",
    "garbage",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn turns_and_knowledge_are_monotone(script in proptest::collection::vec(0..POOL.len(), 1..8), seed in 0u64..4) {
        let (mut s, _) = build(KITE, seed);
        let mut known = 0;
        let mut facts = s.factbase.len();
        for (i, &k) in script.iter().enumerate() {
            let fb = match s.step_text(POOL[k]) {
                Ok(fb) => fb,
                Err(EngineError::Solved) => break,
                Err(e) => panic!("{e}"),
            };
            prop_assert_eq!(fb.turn as usize, i + 2);
            prop_assert!(fb.known.len() >= known);
            prop_assert!(s.factbase.len() >= facts);
            // Every listed proposition is derivable in the current state.
            for k in &fb.known {
                prop_assert!(s.factbase.derives(&k.parse().unwrap()).unwrap());
            }
            known = fb.known.len();
            facts = s.factbase.len();
        }
    }
}
