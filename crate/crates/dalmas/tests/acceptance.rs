//! Acceptance criteria, one PASS/FAIL line each. Runtime budgets are checked
//! alongside the results.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dalmas::cli::{execute, Cli};
use dalmas::scenario::{Overrides, QuantificationKind, Scenario, UtilityKind};
use dalmas::trace::write_trace;
use dalmas_core::bqo::{verify_bqo, SemanticCis};
use dalmas_core::condition::{denote, TableInterpretation};
use dalmas_core::normative::GcSystem;
use dalmas_core::positions::{
    atoms_of, maxiconjunction_table, mcis_over, rt_equivalent, verify_move_isomorphism, verify_npcis, Signs,
};
use dalmas_core::prohibition::prohibited_set;
use dalmas_core::waste::{builtin_norms, lap, overlap, probe_universe, Cell, GridState, WasteAction, WasteWorld};
use dalmas_core::{
    AgentId, Condition, Consequence, Norm, Position, ProbeUniverse, ProhibitionOptions, Vocabulary, World,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn reference_path() -> PathBuf {
    manifest().join("scenarios/reference.toml")
}

// ---------------------------------------------------------------- oracles

fn sphere(c: Cell) -> HashSet<(i32, i32)> {
    (-1..=1).flat_map(|dx| (-1..=1).map(move |dy| (c.x + dx, c.y + dy))).collect()
}

fn cell_overlap(a: Cell, b: Cell) -> u32 {
    sphere(a).intersection(&sphere(b)).count() as u32
}

/// Evaluates a waste-world condition from the cell-set overlap.
fn oracle_eval(c: &Condition, tuple: &[AgentId], s: &GridState) -> bool {
    match c {
        Condition::Atom { name, .. } if name == "distinct" => tuple[0] != tuple[1],
        Condition::Atom { name, .. } => {
            let j: u32 = name.strip_prefix("lap").and_then(|j| j.parse().ok()).expect("lap atom");
            cell_overlap(s.position(tuple[0]).unwrap(), s.position(tuple[1]).unwrap()) == j
        }
        Condition::And(a, b) => oracle_eval(a, tuple, s) && oracle_eval(b, tuple, s),
        Condition::Or(a, b) => oracle_eval(a, tuple, s) || oracle_eval(b, tuple, s),
        Condition::Not(a) => !oracle_eval(a, tuple, s),
        Condition::Top(_) => true,
        Condition::Bottom(_) => false,
    }
}

const A: AgentId = AgentId(0);
const B: AgentId = AgentId(1);

/// Brute force over (norm, tuple, action) for the elementary builtin norms,
/// written from their texts.
fn prohibition_oracle(
    s: &GridState,
    mover: AgentId,
    feasible: &[WasteAction],
) -> BTreeSet<(String, [AgentId; 2], WasteAction)> {
    let mut out = BTreeSet::new();
    for w1 in [A, B] {
        for w2 in [A, B] {
            let ov = |st: &GridState| cell_overlap(st.position(w1).unwrap(), st.position(w2).unwrap());
            let before = ov(s);
            for &act in feasible {
                let after = ov(&s.moved(mover, act));
                let fired = [
                    ("7", ![4, 6, 9].contains(&before) && after == 6),
                    ("8", before == 4 && after == 3),
                    ("9", before == 6 && ![4, 6, 9].contains(&after)),
                    ("10", w1 != w2 && after == 9),
                ];
                for (id, hit) in fired {
                    if hit {
                        out.insert((id.to_string(), [w1, w2], act));
                    }
                }
            }
        }
    }
    out
}

fn two_agent_placements() -> Vec<GridState> {
    let cells: Vec<Cell> = (0..5).flat_map(|x| (0..5).map(move |y| Cell::new(x, y))).collect();
    let mut out = Vec::new();
    for &a in &cells {
        for &b in &cells {
            if a != b {
                out.push(GridState::new(5, 5, [(A, a), (B, b)], []).unwrap());
            }
        }
    }
    out
}

// ---------------------------------------------------------------- criteria

fn overlap_arithmetic() -> Outcome {
    let mut seen = BTreeSet::new();
    for dx in -4..=4 {
        for dy in -4..=4 {
            let (a, b) = (Cell::new(0, 0), Cell::new(dx, dy));
            let counted = cell_overlap(a, b);
            ensure(overlap(a, b) == counted, || {
                format!("overlap at ({dx},{dy}) is {} but {counted} cells", overlap(a, b))
            })?;
            seen.insert(counted);
        }
    }
    let expected: BTreeSet<u32> = [0, 1, 2, 3, 4, 6, 9].into();
    ensure(seen == expected, || format!("attainable overlaps {seen:?}"))?;
    Ok(format!("attainable overlaps {seen:?} over 81 displacements"))
}

fn position_table() -> Outcome {
    let patterns: Vec<Signs> =
        (0..8u8).map(|m| Signs { may_do: m & 4 == 0, may_pass: m & 2 == 0, may_do_not: m & 1 == 0 }).collect();
    // the three options are exhaustive, so at least one must be permitted
    let consistent: Vec<Signs> = patterns.iter().copied().filter(|s| s.may_do || s.may_pass || s.may_do_not).collect();
    ensure(consistent.len() == 7, || format!("{} consistent patterns", consistent.len()))?;
    let table = maxiconjunction_table();
    let rows: Vec<Signs> = table.iter().map(|r| r.signs).collect();
    let key = |s: &Signs| (s.may_do, s.may_pass, s.may_do_not);
    let row_set: BTreeSet<_> = rows.iter().map(key).collect();
    ensure(rows.len() == 7 && row_set == consistent.iter().map(key).collect(), || format!("table rows {rows:?}"))?;
    ensure(patterns.iter().filter(|s| s.is_consistent()).count() == 7, || "is_consistent disagrees".into())?;
    let labels: Vec<(String, &str)> =
        table.iter().filter_map(|r| r.abbreviation.map(|a| (r.signs.to_string(), a))).collect();
    ensure(
        labels
            == [
                ("(+,−,−)".to_string(), "Shall Do"),
                ("(−,+,−)".to_string(), "Shall Pass"),
                ("(−,−,+)".to_string(), "Shall Do not"),
            ],
        || format!("labels {labels:?}"),
    )?;

    let principles = [(1, 1), (2, 4), (3, 3), (5, 7), (6, 6)];
    let universe = probe_universe(5, 5, 2);
    let bases: Vec<Condition> = (0..=9).map(lap).chain([Condition::atom("distinct", 2)]).collect();
    let vocab = Vocabulary::build(2, bases.iter().cloned(), &universe).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for d in &bases {
        for (i, j) in principles {
            let left = Consequence::typed(Position::from_index(i).unwrap(), d.clone());
            let right = Consequence::typed(Position::from_index(j).unwrap(), Condition::not(d.clone()));
            let both = rt_equivalent(&left, &right, &vocab).map_err(|e| e.to_string())?
                && rt_equivalent(&right, &left, &vocab).map_err(|e| e.to_string())?;
            ensure(both, || format!("T{i}({d}) vs T{j}(not {d})"))?;
            checked += 1;
        }
    }
    Ok(format!("7 of 8 sign patterns consistent; {checked} symmetry equivalences over 11 bases"))
}

const NAMES: [&str; 3] = ["p", "q", "r"];

/// Deterministic truth tables; `kind` 3 makes `r ≡ p` and `q ≡ ¬p`.
fn table_universe(agents: usize, states: usize, kind: u64) -> ProbeUniverse<TableInterpretation> {
    let mut interp = TableInterpretation::new(agents, states);
    for (k, name) in NAMES.iter().enumerate() {
        interp = interp.declare(name, 1, move |t, s| {
            let bit = |k: u64| {
                let mut x = (t[0].0 as u64) << 32 ^ (s as u64) << 8 ^ k ^ kind << 48;
                x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
                x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                (x ^ (x >> 31)) & 1 == 1
            };
            match (kind, k) {
                (3, 1) => !bit(0),
                (3, 2) => bit(0),
                _ => bit(k as u64),
            }
        });
    }
    interp.universe()
}

/// One term per class of the Boolean algebra generated by `atoms` on `u`.
fn generated_algebra(atoms: &[Condition], u: &ProbeUniverse<TableInterpretation>) -> Vec<Condition> {
    let minterm = |m: usize| {
        Condition::all(atoms.iter().enumerate().map(|(i, a)| {
            if m >> i & 1 == 1 {
                a.clone()
            } else {
                Condition::not(a.clone())
            }
        }))
        .unwrap()
    };
    let live: Vec<Condition> =
        (0..1usize << atoms.len()).map(minterm).filter(|t| !denote(t, u).unwrap().is_empty()).collect();
    (0u32..1 << live.len())
        .map(|mask| {
            let parts: Vec<Condition> =
                live.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t.clone()).collect();
            Condition::any(parts).unwrap_or(Condition::bottom(1))
        })
        .collect()
}

fn literals_and_pairs(atoms: &[Condition]) -> Vec<Condition> {
    let mut base: Vec<Condition> =
        atoms.iter().cloned().chain(atoms.iter().map(|a| Condition::not(a.clone()))).collect();
    base.extend([Condition::top(1), Condition::bottom(1)]);
    let mut out = base.clone();
    for (i, a) in base.iter().enumerate() {
        for b in &base[i + 1..] {
            out.push(Condition::and(a.clone(), b.clone()));
            out.push(Condition::or(a.clone(), b.clone()));
        }
    }
    out
}

fn algebra_laws() -> Outcome {
    let mut universes = Vec::new();
    for agents in 1..=3 {
        for states in [1, 4, 16] {
            universes.push(table_universe(agents, states, 0));
        }
    }
    universes.push(table_universe(3, 16, 3));
    let (mut bqo_elems, mut iso_elems, mut np_checks) = (0, 0, 0);
    for u in &universes {
        for size in 1..=3 {
            let atoms: Vec<Condition> = NAMES[..size].iter().map(|n| Condition::atom(*n, 1)).collect();
            let err =
                |what: &str| format!("{what}: {} agents × {} states, {size} bases", u.agents().len(), u.states().len());

            let cis = SemanticCis::new(u, 1);
            let carrier = cis.lift_all(generated_algebra(&atoms, u)).map_err(|e| e.to_string())?;
            bqo_elems += carrier.len();
            let report = verify_bqo(&cis, &carrier);
            ensure(report.is_ok(), || format!("{} {:?}", err("Bqo"), report.violations.first()))?;

            let small = literals_and_pairs(&atoms);
            iso_elems += small.len();
            let iso = verify_move_isomorphism(u, &small).map_err(|e| e.to_string())?;
            ensure(iso.is_empty(), || format!("{} {:?}", err("m-cis"), iso.first()))?;
            let lifted = SemanticCis::new(u, 1).lift_all(small).map_err(|e| e.to_string())?;
            let m = mcis_over(dalmas_core::bqo::Bqo::new(SemanticCis::new(u, 1), lifted));
            ensure(m.verify().is_ok(), || err("m-cis Bqo"))?;

            let vocab = Vocabulary::build(1, atoms.iter().cloned(), u).map_err(|e| e.to_string())?;
            let mut samples = vec![Consequence::Top(1), Consequence::Bottom(1)];
            for d in atoms.iter().cloned().chain([Condition::top(1), Condition::bottom(1)]) {
                for p in Position::ALL {
                    samples.push(Consequence::typed(p, d.clone()));
                    samples.push(Consequence::typed(p, Condition::not(d.clone())));
                }
            }
            np_checks += samples.len();
            let np = verify_npcis(&vocab, &samples).map_err(|e| e.to_string())?;
            ensure(np.is_ok(), || {
                format!("{} {:?} {:?}", err("np-cis"), np.violations.first(), np.bqo.violations.first())
            })?;
        }
    }
    Ok(format!(
        "{} universes × 3 vocabularies; Bqo over {bqo_elems} classes, m-cis over {iso_elems} terms, np-cis over {np_checks} consequences",
        universes.len()
    ))
}

fn elementary_norms() -> Vec<Norm> {
    builtin_norms().into_iter().filter(|n| n.is_elementary()).collect()
}

fn prohibition_oracle_equivalence() -> Outcome {
    let world = WasteWorld::new(vec![A, B]);
    let norms = elementary_norms();
    let mut situations = 0;
    let mut triples = 0;
    for s in two_agent_placements() {
        for mover in [A, B] {
            let feasible = world.feasible(mover, &s);
            let v = prohibited_set(&world, &norms, mover, &s, &feasible, ProhibitionOptions::default())
                .map_err(|e| e.to_string())?;
            let engine: BTreeSet<_> = v
                .prohibited
                .iter()
                .flat_map(|(_, ws)| ws.iter().map(|w| (w.norm_id.clone(), [w.tuple[0], w.tuple[1]], w.action)))
                .collect();
            let oracle = prohibition_oracle(&s, mover, &feasible);
            ensure(engine == oracle, || {
                format!("mover {mover} at {:?}: engine {engine:?}, oracle {oracle:?}", s.positions())
            })?;
            let prohibited: BTreeSet<_> = v.prohibited.iter().map(|(a, _)| *a).collect();
            let oracle_actions: BTreeSet<_> = oracle.iter().map(|(_, _, a)| *a).collect();
            ensure(prohibited == oracle_actions, || "prohibited sets differ".into())?;
            situations += 1;
            triples += oracle.len();
        }
    }
    Ok(format!("{situations} situations agree, {triples} prohibiting triples"))
}

fn behavioral_fixture() -> Outcome {
    let world = WasteWorld::new(vec![A, B]);
    let s = GridState::new(5, 5, [(A, Cell::new(2, 1)), (B, Cell::new(2, 2))], []).unwrap();
    ensure(cell_overlap(Cell::new(2, 1), Cell::new(2, 2)) == 6, || "fixture overlap".into())?;
    let feasible = world.feasible(A, &s);
    let oracle = prohibition_oracle(&s, A, &feasible);
    let south: Vec<_> = oracle.iter().filter(|(_, _, a)| *a == WasteAction::South).collect();
    ensure(!south.is_empty() && south.iter().all(|(id, _, _)| id == "9"), || format!("oracle: {oracle:?}"))?;
    let v = prohibited_set(&world, &builtin_norms(), A, &s, &feasible, ProhibitionOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(v.is_prohibited(&WasteAction::South), || "south not prohibited".into())?;
    let w = v.witnesses(&WasteAction::South);
    ensure(w.iter().all(|w| w.norm_id == "9" && w.fired.iter().all(|f| f.op.to_string() == "E5")), || {
        format!("{w:?}")
    })?;
    ensure(v.permissible == [WasteAction::East, WasteAction::West], || format!("permissible {:?}", v.permissible))?;

    let mut norm8 = 0;
    for s in two_agent_placements() {
        for mover in [A, B] {
            norm8 +=
                prohibition_oracle(&s, mover, &world.feasible(mover, &s)).iter().filter(|(id, _, _)| id == "8").count();
        }
    }
    ensure(norm8 == 0, || format!("norm 8 fired {norm8} times"))?;
    Ok("south prohibited by norm 9 through E5; east, west permissible; norm 8 fires in 0 of 1200 situations".into())
}

fn cli(args: &[&str]) -> (u8, String) {
    use clap::Parser;
    let cli = Cli::try_parse_from(std::iter::once("dalmas").chain(args.iter().copied())).expect("arguments");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(&cli, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned() + &String::from_utf8_lossy(&err))
}

fn run_determinism_and_compliance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reference = reference_path();
    let mut outputs = Vec::new();
    for i in 0..3 {
        let out = dir.path().join(format!("run{i}.jsonl"));
        let status = Command::new(env!("CARGO_BIN_EXE_dalmas"))
            .args(["run", "--scenario", reference.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.code() == Some(0), || format!("run exited {:?}", status.status.code()))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "repeated runs differ".into())?;
    let golden = std::fs::read(manifest().join("tests/golden/reference.trace.jsonl")).map_err(|e| e.to_string())?;
    ensure(outputs[0] == golden, || "run differs from the golden trace".into())?;

    // engine traces under every engine setting audit clean
    let base = Scenario::load(&reference).map_err(|e| e.to_string())?;
    let mut variants: Vec<(Scenario, Vec<&str>)> = Vec::new();
    variants.push((base.clone(), vec![]));
    variants.push((base.clone(), vec!["--minimal-only"]));
    variants.push((base.clone(), vec!["--extended-rules"]));
    let mut v = base.clone();
    v.world.pass = true;
    v.engine.k = 30;
    variants.push((v, vec![]));
    let mut v = base.clone();
    v.engine.quantification = QuantificationKind::MoverFirst;
    v.engine.turn_order = Some(vec!["w2".into(), "w1".into()]);
    variants.push((v, vec![]));
    let mut v = base.clone();
    v.world.utility = UtilityKind::Scaled;
    v.world.utility_scale = Some(3.0);
    v.engine.tie_break = Some(vec!["west".into(), "south".into()]);
    variants.push((v, vec![]));
    let mut audited = 0;
    for (i, (scenario, flags)) in variants.iter().enumerate() {
        let spath = dir.path().join(format!("s{i}.toml"));
        let tpath = dir.path().join(format!("t{i}.jsonl"));
        std::fs::write(&spath, scenario.to_toml_string()).map_err(|e| e.to_string())?;
        let (s, t) = (spath.to_str().unwrap(), tpath.to_str().unwrap());
        let mut args = vec!["run", "--scenario", s, "--out", t];
        args.extend(flags.iter().copied());
        let (code, text) = cli(&args);
        ensure(code == 0, || format!("variant {i} run: {text}"))?;
        let mut args = vec!["audit", "--trace", t, "--scenario", s];
        args.extend(flags.iter().copied());
        let (code, text) = cli(&args);
        ensure(code == 0, || format!("variant {i} audit exited {code}: {text}"))?;
        audited += 1;
    }

    // every corruption of every chosen action is caught
    let text = String::from_utf8(golden).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    let alternatives = ["\"north\"", "\"east\"", "\"south\"", "\"west\"", "\"pass\"", "null"];
    let mut corruptions = 0;
    for t in 1..lines.len() {
        let mut record: serde_json::Value = serde_json::from_str(lines[t]).map_err(|e| e.to_string())?;
        let original = record["chosen"].to_string();
        for alt in alternatives.iter().filter(|a| **a != original) {
            record["chosen"] = serde_json::from_str(alt).unwrap();
            let mut corrupted: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            corrupted[t] = record.to_string();
            let path = dir.path().join("corrupt.jsonl");
            std::fs::write(&path, corrupted.join("\n") + "\n").map_err(|e| e.to_string())?;
            let (code, out) =
                cli(&["audit", "--trace", path.to_str().unwrap(), "--scenario", reference.to_str().unwrap()]);
            ensure(code == 2, || format!("t={t} chosen {alt}: exit {code}: {out}"))?;
            ensure(out.contains(&format!("t={t}")), || {
                format!("t={t} chosen {alt}: report names another event: {out}")
            })?;
            corruptions += 1;
        }
    }
    Ok(format!("3 identical runs match golden; {audited} engine traces audit clean; {corruptions} corruptions exit 2"))
}

fn minimal_norm_computation() -> Outcome {
    let universe = probe_universe(5, 5, 2);
    let norms = builtin_norms();
    let gc = GcSystem::build(norms.clone(), &universe).map_err(|e| e.to_string())?;

    let extent = |c: &Condition| -> Vec<bool> {
        let mut out = Vec::new();
        for s in universe.states() {
            for t in [[A, A], [A, B], [B, A], [B, B]] {
                out.push(oracle_eval(c, &t, s));
            }
        }
        out
    };
    let grounds: Vec<Vec<bool>> = norms.iter().map(|n| extent(n.ground.base())).collect();
    let g_leq = |i: usize, j: usize| grounds[i].iter().zip(&grounds[j]).all(|(a, b)| !a || *b);
    let vocab =
        Vocabulary::for_consequences(2, norms.iter().map(|n| &n.consequence), &universe).map_err(|e| e.to_string())?;
    let sets = norms
        .iter()
        .map(|n| atoms_of(&n.consequence, &vocab))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let c_leq = |i: usize, j: usize| sets[i].is_subset(&sets[j]);
    // ⟨a1,a2⟩ ◁ ⟨b1,b2⟩: b1 implies a1 and a2 implies b2, one of them strictly
    let strictly_below = |x: usize, y: usize| {
        let g = g_leq(y, x);
        let c = c_leq(x, y);
        (g && !g_leq(x, y) && c) || (g && c && !c_leq(y, x))
    };
    let oracle: Vec<&str> = (0..norms.len())
        .filter(|&y| !(0..norms.len()).any(|x| strictly_below(x, y)))
        .map(|i| norms[i].id.as_str())
        .collect();
    let engine: Vec<&str> = gc.minimal_norms().iter().map(|n| n.id.as_str()).collect();
    ensure(engine == oracle, || format!("engine {engine:?}, oracle {oracle:?}"))?;
    let elementary: Vec<&str> = gc.elementary_norms().iter().map(|n| n.id.as_str()).collect();
    ensure(elementary == ["7", "8", "9", "10"], || format!("elementary {elementary:?}"))?;
    Ok(format!("minimal {engine:?}; elementary {elementary:?}"))
}

fn strip_scores(trace: &str) -> Vec<serde_json::Value> {
    trace
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if let Some(o) = v.as_object_mut() {
                o.remove("scores");
            }
            v
        })
        .collect()
}

fn conservation_and_scaling() -> Outcome {
    let base = Scenario::load(&reference_path()).map_err(|e| e.to_string())?;
    let mut runs = 0;
    let mut events = 0;
    let placements = two_agent_placements();
    for (i, p) in placements.iter().enumerate().step_by(13) {
        let mut scenario = base.clone();
        scenario.engine.k = 20;
        scenario.world.pass = i % 2 == 0;
        for (agent, spec) in scenario.world.agents.iter_mut().enumerate() {
            let c = p.position(AgentId(agent as u32)).unwrap();
            spec.at = [c.x, c.y];
        }
        scenario.world.waste.retain(|w| !scenario.world.agents.iter().any(|a| a.at == w.at));
        let session = scenario.session(Overrides::default()).map_err(|e| e.to_string())?;
        let trace = session.engine.run(session.initial.clone(), session.k).map_err(|e| e.to_string())?;
        let total = |s: &GridState| s.total_waste() + s.total_collected();
        let t0 = total(&session.initial.state);
        for e in &trace.events {
            ensure(total(&e.next.state) == t0, || {
                format!("run {i} t={}: total {} != {t0}", e.t, total(&e.next.state))
            })?;
        }
        let mut plain = Vec::new();
        write_trace(&mut plain, &session, &scenario.name, &trace).map_err(|e| e.to_string())?;
        let plain = strip_scores(&String::from_utf8(plain).unwrap());
        for k in [0.1, 0.5, 3.0, 1e6] {
            let mut scaled = scenario.clone();
            scaled.world.utility = UtilityKind::Scaled;
            scaled.world.utility_scale = Some(k);
            let session = scaled.session(Overrides::default()).map_err(|e| e.to_string())?;
            let trace = session.engine.run(session.initial.clone(), session.k).map_err(|e| e.to_string())?;
            let mut out = Vec::new();
            write_trace(&mut out, &session, &scaled.name, &trace).map_err(|e| e.to_string())?;
            ensure(strip_scores(&String::from_utf8(out).unwrap()) == plain, || {
                format!("run {i} differs under scale {k}")
            })?;
        }
        runs += 1;
        events += trace.events.len();
    }
    Ok(format!("{runs} runs, {events} events conserve waste; traces identical under scales 0.1, 0.5, 3, 1e6"))
}

struct Criterion {
    number: u8,
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { number: 1, name: "overlap arithmetic", budget: secs(1), check: overlap_arithmetic },
        Criterion { number: 2, name: "position-type table", budget: secs(1), check: position_table },
        Criterion { number: 3, name: "algebra law suites", budget: secs(10), check: algebra_laws },
        Criterion {
            number: 4,
            name: "prohibition oracle equivalence",
            budget: secs(30),
            check: prohibition_oracle_equivalence,
        },
        Criterion { number: 5, name: "derived behavioral fixture", budget: None, check: behavioral_fixture },
        Criterion {
            number: 6,
            name: "run determinism and compliance",
            budget: None,
            check: run_determinism_and_compliance,
        },
        Criterion { number: 7, name: "minimal-norm computation", budget: secs(30), check: minimal_norm_computation },
        Criterion {
            number: 8,
            name: "conservation and argmax invariance",
            budget: None,
            check: conservation_and_scaling,
        },
    ];
    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = match (result, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} criterion {} ({}): {detail} [{elapsed:.2?}]", c.number, c.name);
        failed += result.is_err() as u32;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
