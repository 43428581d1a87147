use std::path::Path;

use dalmas::scenario::{
    AgentSpec, BuiltinSelection, CustomNorm, EngineSpec, NormsSpec, Overrides, QuantificationKind, Scenario,
    UtilityKind, WasteSpec, WorldSpec,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::POSITIVE | prop::num::f64::NEGATIVE | prop::num::f64::NORMAL | prop::num::f64::ZERO
}

fn name() -> impl Strategy<Value = String> {
    "\\PC{0,12}"
}

fn scenario() -> impl Strategy<Value = Scenario> {
    let world = (
        0u32..50,
        0u32..50,
        any::<bool>(),
        prop_oneof![Just(UtilityKind::Collected), Just(UtilityKind::Scaled)],
        prop::option::of(finite()),
        prop::collection::vec((name(), any::<[i32; 2]>()).prop_map(|(id, at)| AgentSpec { id, at }), 0..4),
        prop::collection::vec((any::<[i32; 2]>(), finite()).prop_map(|(at, amount)| WasteSpec { at, amount }), 0..4),
    )
        .prop_map(|(width, height, pass, utility, utility_scale, agents, waste)| WorldSpec {
            width,
            height,
            pass,
            utility,
            utility_scale,
            agents,
            waste,
        });
    let builtin = prop_oneof![
        name().prop_map(BuiltinSelection::Keyword),
        prop::collection::vec(name(), 0..4).prop_map(BuiltinSelection::Ids),
    ];
    let custom = prop::collection::vec(
        (name(), name(), name(), prop::option::of(name())).prop_map(|(id, ground, consequence, note)| CustomNorm {
            id,
            ground,
            consequence,
            note,
        }),
        0..3,
    );
    let engine = (
        0usize..1000,
        prop::option::of(prop::collection::vec(name(), 0..3)),
        prop::option::of(prop::collection::vec(name(), 0..3)),
        prop_oneof![Just(QuantificationKind::Free), Just(QuantificationKind::MoverFirst)],
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(k, turn_order, tie_break, quantification, minimal_only, extended_rules)| EngineSpec {
            k,
            turn_order,
            tie_break,
            quantification,
            minimal_only,
            extended_rules,
        });
    (name(), world, builtin, custom, engine).prop_map(|(name, world, builtin, custom, engine)| Scenario {
        name,
        world,
        norms: NormsSpec { builtin, custom },
        engine,
    })
}

proptest! {
    #[test]
    fn scenarios_round_trip_through_toml(s in scenario()) {
        let text = s.to_toml_string();
        let back = Scenario::from_toml_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}

fn reference() -> Scenario {
    Scenario::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference.toml")).unwrap()
}

#[test]
fn reference_scenario_round_trips() {
    let s = reference();
    assert_eq!(Scenario::from_toml_str(&s.to_toml_string()).unwrap(), s);
}

#[test]
fn defaults_fill_the_engine_block() {
    let s = Scenario::from_toml_str(
        "name = \"tiny\"\n[world]\nwidth = 2\nheight = 1\nagents = [{ id = \"a\", at = [0, 0] }]\n",
    )
    .unwrap();
    assert_eq!(s.engine, EngineSpec::default());
    assert_eq!(s.norms.builtin, BuiltinSelection::Ids(vec![]));
    let session = s.session(Overrides::default()).unwrap();
    assert_eq!(session.k, 10);
    assert!(session.norms.is_empty());
}

#[test]
fn unknown_keys_are_rejected() {
    let err =
        Scenario::from_toml_str("name = \"x\"\ncolour = 1\n[world]\nwidth = 1\nheight = 1\nagents = []\n").unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn session_applies_overrides_and_settings() {
    let mut s = reference();
    s.engine.turn_order = Some(vec!["w2".into(), "w1".into()]);
    s.engine.tie_break = Some(vec!["west".into()]);
    let session = s.session(Overrides { k: Some(3), extended_rules: true, minimal_only: true }).unwrap();
    assert_eq!(session.k, 3);
    assert_eq!(session.agent_name(session.initial.mover), "w2");
    assert!(session.engine.options().extended);
    assert_eq!(session.norms.len(), 11);
    assert_eq!(session.engine.norms().len(), 10);

    s.engine.turn_order = Some(vec!["w2".into()]);
    assert!(s.session(Overrides::default()).is_err());
    s.engine.turn_order = None;
    s.engine.tie_break = Some(vec!["up".into()]);
    assert!(s.session(Overrides::default()).unwrap_err().to_string().contains("engine.tie_break[0]"));
}

#[test]
fn builtin_selection_by_id() {
    let mut s = reference();
    s.norms.builtin = BuiltinSelection::Ids(vec!["9".into(), "7".into()]);
    let session = s.session(Overrides::default()).unwrap();
    let ids: Vec<&str> = session.norms.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(ids, ["9", "7"]);
    s.norms.builtin = BuiltinSelection::Ids(vec!["12".into()]);
    assert!(s.session(Overrides::default()).unwrap_err().to_string().contains("norms.builtin[0]"));
    s.norms.builtin = BuiltinSelection::Keyword("some".into());
    assert!(s.session(Overrides::default()).is_err());
}

#[test]
fn custom_norms_parse_and_must_be_unique() {
    let mut s = reference();
    s.norms.builtin = BuiltinSelection::Ids(vec!["9".into()]);
    s.norms.custom.push(CustomNorm {
        id: "keep-apart".into(),
        ground: "(and distinct/2 (not lap0/2))".into(),
        consequence: "T7((or lap9/2 lap6/2))".into(),
        note: None,
    });
    let session = s.session(Overrides::default()).unwrap();
    assert_eq!(session.norms[1].to_string(), "⟨M(and distinct/2 (not lap0/2)), T7((or lap9/2 lap6/2))⟩");
    s.norms.custom[0].id = "9".into();
    assert!(s.session(Overrides::default()).unwrap_err().to_string().contains("used twice"));
    s.norms.custom[0].consequence = "T8(lap1/2)".into();
    assert!(s.session(Overrides::default()).unwrap_err().to_string().contains("norms.custom[0].consequence"));
}
