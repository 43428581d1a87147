//! Scenario files: a waste-world grid, a norm selection and engine settings.

use std::collections::BTreeSet;
use std::path::Path;

use dalmas_core::engine::TurnOperator;
use dalmas_core::prohibition::validate_norms;
use dalmas_core::text::{parse_condition, parse_consequence};
use dalmas_core::waste::{builtin_norms, probe_universe, Cell, GridState, Utility, WasteAction, WasteWorld};
use dalmas_core::{AgentId, DeterministicDalmas, GcSystem, Norm, ProhibitionOptions, Quantification, Situation};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub world: WorldSpec,
    #[serde(default)]
    pub norms: NormsSpec,
    #[serde(default)]
    pub engine: EngineSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub width: u32,
    pub height: u32,
    /// Adds the pass action to every agent's feasible set.
    #[serde(default)]
    pub pass: bool,
    #[serde(default)]
    pub utility: UtilityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility_scale: Option<f64>,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub waste: Vec<WasteSpec>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityKind {
    #[default]
    Collected,
    Scaled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub at: [i32; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WasteSpec {
    pub at: [i32; 2],
    pub amount: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSpec {
    #[serde(default)]
    pub builtin: BuiltinSelection,
    #[serde(default)]
    pub custom: Vec<CustomNorm>,
}

/// `"all"`, `"none"`, or a list of builtin norm ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BuiltinSelection {
    Keyword(String),
    Ids(Vec<String>),
}

impl Default for BuiltinSelection {
    fn default() -> Self {
        BuiltinSelection::Ids(Vec::new())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomNorm {
    pub id: String,
    /// Condition text, e.g. `(and lap6/2 distinct/2)`.
    pub ground: String,
    /// Consequence text, e.g. `T5((or lap4/2 lap6/2 lap9/2))`.
    pub consequence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSpec {
    #[serde(default = "default_k")]
    pub k: usize,
    /// Cyclic turn order; declaration order when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_order: Option<Vec<String>>,
    /// Preferred actions for breaking ties; north, east, south, west, pass when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<Vec<String>>,
    #[serde(default)]
    pub quantification: QuantificationKind,
    #[serde(default)]
    pub minimal_only: bool,
    #[serde(default)]
    pub extended_rules: bool,
}

fn default_k() -> usize {
    10
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec {
            k: default_k(),
            turn_order: None,
            tie_break: None,
            quantification: QuantificationKind::Free,
            minimal_only: false,
            extended_rules: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantificationKind {
    #[default]
    Free,
    MoverFirst,
}

/// Command-line settings layered over the scenario's engine block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub k: Option<usize>,
    pub extended_rules: bool,
    pub minimal_only: bool,
}

/// A validated scenario, ready to run or audit.
pub struct Session {
    pub engine: DeterministicDalmas<WasteWorld>,
    pub initial: Situation<GridState>,
    /// Scenario agent ids, indexed by `AgentId`.
    pub agent_names: Vec<String>,
    /// Every selected norm, before any restriction to minimal norms.
    pub norms: Vec<Norm>,
    pub k: usize,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("agents", &self.agent_names)
            .field("norms", &self.norms.iter().map(|n| &n.id).collect::<Vec<_>>())
            .field("active", &self.engine.norms().iter().map(|n| &n.id).collect::<Vec<_>>())
            .field("initial", &self.initial)
            .field("k", &self.k)
            .finish()
    }
}

impl Session {
    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agent_names[a.0 as usize]
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agent_names.iter().position(|n| n == name).map(|i| AgentId(i as u32))
    }
}

/// Side length of the probe grid used to order conditions when computing minimal
/// norms. Every waste atom depends only on the displacement between two agents,
/// and a 5×5 grid realizes every displacement with a distinct overlap.
pub const PROBE_SIDE: u32 = 5;

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ScenarioSyntax(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable in TOML")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_toml_str(&text)
    }

    /// The selected norms in order: builtins first, then custom norms.
    pub fn norms(&self, world: &WasteWorld) -> Result<Vec<Norm>> {
        let builtins = builtin_norms();
        let mut out: Vec<Norm> = match &self.norms.builtin {
            BuiltinSelection::Keyword(k) if k == "all" => builtins,
            BuiltinSelection::Keyword(k) if k == "none" => Vec::new(),
            BuiltinSelection::Keyword(k) => {
                return Err(Error::invalid(
                    "norms.builtin",
                    format!("expected \"all\", \"none\" or a list of ids, got {k:?}"),
                ))
            }
            BuiltinSelection::Ids(ids) => {
                let mut picked = Vec::new();
                for (i, id) in ids.iter().enumerate() {
                    let norm = builtins.iter().find(|n| &n.id == id).ok_or_else(|| {
                        Error::invalid(format!("norms.builtin[{i}]"), format!("no builtin norm {id:?}"))
                    })?;
                    picked.push(norm.clone());
                }
                picked
            }
        };
        for (i, c) in self.norms.custom.iter().enumerate() {
            let field = |f: &str| format!("norms.custom[{i}].{f}");
            let ground = parse_condition(&c.ground).map_err(|e| Error::invalid(field("ground"), e))?;
            let consequence = parse_consequence(&c.consequence).map_err(|e| Error::invalid(field("consequence"), e))?;
            let mut norm = Norm::new(c.id.clone(), ground, consequence);
            norm.note = c.note.clone();
            validate_norms(std::slice::from_ref(&norm), world)
                .map_err(|e| Error::invalid(format!("norms.custom[{i}]"), e))?;
            out.push(norm);
        }
        let mut seen = BTreeSet::new();
        for n in &out {
            if !seen.insert(n.id.as_str()) {
                return Err(Error::invalid("norms", format!("norm id {:?} is used twice", n.id)));
            }
        }
        Ok(out)
    }

    pub fn session(&self, overrides: Overrides) -> Result<Session> {
        let w = &self.world;
        if w.agents.is_empty() {
            return Err(Error::invalid("world.agents", "at least one agent is required"));
        }
        let mut agent_names: Vec<String> = Vec::new();
        for (i, a) in w.agents.iter().enumerate() {
            if agent_names.contains(&a.id) {
                return Err(Error::invalid(format!("world.agents[{i}].id"), format!("duplicate agent id {:?}", a.id)));
            }
            agent_names.push(a.id.clone());
        }
        let ids: Vec<AgentId> = (0..w.agents.len() as u32).map(AgentId).collect();

        let utility = match (w.utility, w.utility_scale) {
            (UtilityKind::Collected, None) => Utility::Collected,
            (UtilityKind::Collected, Some(_)) => {
                return Err(Error::invalid("world.utility_scale", "only allowed with utility = \"scaled\""))
            }
            (UtilityKind::Scaled, Some(k)) if k.is_finite() && k > 0.0 => Utility::Scaled(k),
            (UtilityKind::Scaled, _) => {
                return Err(Error::invalid("world.utility_scale", "scaled utility needs a positive finite scale"))
            }
        };
        let state = self.initial_state(&ids)?;
        let world = WasteWorld::new(ids.clone()).with_pass(w.pass).with_utility(utility);
        let norms = self.norms(&world)?;

        let e = &self.engine;
        let extended = e.extended_rules || overrides.extended_rules;
        let active = if e.minimal_only || overrides.minimal_only { minimal_norms(&norms)? } else { norms.clone() };

        let order = match &e.turn_order {
            None => ids.clone(),
            Some(names) => {
                let mut order = Vec::new();
                for (i, n) in names.iter().enumerate() {
                    let id = agent_names.iter().position(|a| a == n).ok_or_else(|| {
                        Error::invalid(format!("engine.turn_order[{i}]"), format!("unknown agent {n:?}"))
                    })?;
                    order.push(AgentId(id as u32));
                }
                if order.len() != ids.len() || order.iter().collect::<BTreeSet<_>>().len() != ids.len() {
                    return Err(Error::invalid("engine.turn_order", "must list every agent exactly once"));
                }
                order
            }
        };

        let mut engine = DeterministicDalmas::new(world, active)?.with_turn(TurnOperator::cyclic(&order)).with_options(
            ProhibitionOptions {
                quantification: match e.quantification {
                    QuantificationKind::Free => Quantification::Free,
                    QuantificationKind::MoverFirst => Quantification::MoverFirst,
                },
                extended,
            },
        );
        if let Some(names) = &e.tie_break {
            let mut actions = Vec::new();
            for (i, n) in names.iter().enumerate() {
                let a = WasteAction::from_name(n)
                    .ok_or_else(|| Error::invalid(format!("engine.tie_break[{i}]"), format!("unknown action {n:?}")))?;
                if actions.contains(&a) {
                    return Err(Error::invalid(format!("engine.tie_break[{i}]"), format!("action {n:?} listed twice")));
                }
                actions.push(a);
            }
            engine = engine.with_tie_break(actions);
        }

        Ok(Session {
            engine,
            initial: Situation { mover: order[0], state },
            agent_names,
            norms,
            k: overrides.k.unwrap_or(e.k),
        })
    }

    fn initial_state(&self, ids: &[AgentId]) -> Result<GridState> {
        let w = &self.world;
        if w.width == 0 || w.height == 0 {
            return Err(Error::invalid("world", "width and height must be positive"));
        }
        let inside = |[x, y]: [i32; 2]| x >= 0 && y >= 0 && (x as u32) < w.width && (y as u32) < w.height;
        for (i, a) in w.agents.iter().enumerate() {
            if !inside(a.at) {
                return Err(Error::invalid(format!("world.agents[{i}].at"), "outside the grid"));
            }
            if let Some(j) = w.agents[..i].iter().position(|b| b.at == a.at) {
                return Err(Error::invalid(format!("world.agents[{i}].at"), format!("same cell as world.agents[{j}]")));
            }
        }
        for (i, p) in w.waste.iter().enumerate() {
            if !inside(p.at) {
                return Err(Error::invalid(format!("world.waste[{i}].at"), "outside the grid"));
            }
            if !p.amount.is_finite() || p.amount < 0.0 {
                return Err(Error::invalid(format!("world.waste[{i}].amount"), "must be finite and non-negative"));
            }
        }
        let cell = |[x, y]: [i32; 2]| Cell::new(x, y);
        Ok(GridState::new(
            w.width,
            w.height,
            ids.iter().zip(&w.agents).map(|(&id, a)| (id, cell(a.at))),
            w.waste.iter().map(|p| (cell(p.at), p.amount)),
        )?)
    }
}

/// The norms with no other selected norm strictly below them, ordered over the
/// two-agent probe grid.
pub fn minimal_norms(norms: &[Norm]) -> Result<Vec<Norm>> {
    let universe = probe_universe(PROBE_SIDE, PROBE_SIDE, 2);
    let gc = GcSystem::build(norms.to_vec(), &universe)?;
    Ok(gc.minimal_norms().into_iter().cloned().collect())
}
