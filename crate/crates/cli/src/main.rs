//! `twistlab` command-line tool.
//!
//! Exit codes: 0 success, 2 parameter error, 3 input-format error,
//! 4 integrity failure (including failed checks).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use twistlab_core::distill::{distill_reference, magic_inputs_with_z_errors};
use twistlab_core::edge_tracker::{FrameGate, SignedPauli};
use twistlab_core::layout::{build_ancilla, build_double_sided, build_square, build_wide, render_svg, Orientation, Patch, Variant};
use twistlab_core::protocols::{cnot_truth_table, distill_skeleton, TraceEvent, Workspace};
use twistlab_core::scheduler::{analyze_hook_faults, schedule_svg, synthesize_schedule, validate_schedule, SchedLayout, Schedule, ScheduleError};
use twistlab_core::surgery::{MergeKind, PatchId};
use twistlab_core::Error;

const SEED_ENV: &str = "TWISTLAB_SEED";

#[derive(Parser)]
#[command(name = "twistlab", version, about = "Lattice surgery with twist defects: layouts, protocols, schedules")]
struct Cli {
    /// Seed for every random choice; identical seeds give identical output.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a patch (or a merged code) and write its JSON and optional SVG.
    Layout {
        #[arg(long, value_enum)]
        kind: LayoutKind,
        #[arg(long)]
        d: usize,
        /// JSON output path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Execute a protocol script (a path or the name of a bundled script).
    Run {
        script: String,
        /// Write the protocol trace here instead of embedding it in the summary.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Synthesize a readout schedule for a layout, or check a given one.
    Schedule {
        layout: PathBuf,
        /// Validate this schedule file instead of synthesizing one.
        #[arg(long)]
        check: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Largest fault combination searched by the hook analysis
        /// (at most 3; 0 disables it).
        #[arg(long)]
        faults: Option<usize>,
    },
    /// 15-to-1 distillation: the surgery skeleton or the dense reference.
    Distill {
        #[arg(long, value_enum, default_value_t = DistillMode::Oracle)]
        mode: DistillMode,
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutKind {
    Square,
    Wide,
    DoubleSidedA,
    DoubleSidedB,
    Ancilla,
    ZzMerge,
    XxMerge,
    XzDislocationMerge,
    YxTwistMerge,
    YzTwistMerge,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistillMode {
    PhysicalSkeleton,
    Oracle,
}

struct Failure {
    code: u8,
    message: String,
}

type Outcome<T> = std::result::Result<T, Failure>;

fn fail<T>(code: u8, message: impl Into<String>) -> Outcome<T> {
    Err(Failure { code, message: message.into() })
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => 2,
            Error::Parse(_) => 3,
            Error::Integrity(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).or_else(|e| fail(2, format!("cannot write {}: {e}", p.display()))),
        None => {
            emit(text);
            Ok(())
        }
    }
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn read_file(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).or_else(|e| fail(2, format!("cannot read {}: {e}", path.display())))
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn merge_kind(kind: LayoutKind) -> Option<MergeKind> {
    match kind {
        LayoutKind::ZzMerge => Some(MergeKind::ZZ),
        LayoutKind::XxMerge => Some(MergeKind::XX),
        LayoutKind::XzDislocationMerge => Some(MergeKind::XZDislocation),
        LayoutKind::YxTwistMerge => Some(MergeKind::YXTwist),
        LayoutKind::YzTwistMerge => Some(MergeKind::YZTwist),
        _ => None,
    }
}

fn build_patch(kind: LayoutKind, d: usize) -> Outcome<Patch> {
    Ok(match kind {
        LayoutKind::Square => build_square(d)?,
        LayoutKind::Wide => build_wide(d)?,
        LayoutKind::DoubleSidedA => build_double_sided(d, Variant::A)?,
        LayoutKind::DoubleSidedB => build_double_sided(d, Variant::B)?,
        LayoutKind::Ancilla => build_ancilla(d, d, Orientation::Horizontal)?,
        _ => unreachable!("merge kinds have no single patch"),
    })
}

fn cmd_layout(kind: LayoutKind, d: usize, out: Option<&Path>, svg: Option<&Path>) -> Outcome<()> {
    let (json, picture) = match merge_kind(kind) {
        Some(mk) => {
            let l = SchedLayout::merge_example(d, mk)?;
            let seam: Vec<_> = l.stabilizers.iter().filter(|s| is_seam(&l, s)).cloned().collect();
            (l.to_json(), render_svg(&l.data_qubits, &l.stabilizers, &seam))
        }
        None => {
            let p = build_patch(kind, d)?;
            (p.to_json(), p.to_svg())
        }
    };
    write_or_print(out, &json)?;
    if let Some(path) = svg {
        write_or_print(Some(path), &picture)?;
    }
    Ok(())
}

/// Seam stabilizers are those whose centre falls in no participant region.
fn is_seam(l: &SchedLayout, s: &twistlab_core::layout::Stabilizer) -> bool {
    let c = twistlab_core::scheduler::centre(s);
    l.regions.iter().find(|r| c.row >= r.rows.0 && c.row <= r.rows.1 && c.col >= r.cols.0 && c.col <= r.cols.1).is_some_and(|r| r.name == "seam")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Script {
    #[serde(default)]
    name: Option<String>,
    distance: usize,
    patches: Vec<PatchDecl>,
    #[serde(default)]
    steps: Vec<Step>,
    #[serde(default)]
    truth_table: Option<TruthSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchDecl {
    name: String,
    slot: usize,
    /// Logical gates tracked on the patch's edges before anything else.
    #[serde(default)]
    frame: Vec<FrameGate>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum Step {
    Prepare { patch: String, state: String },
    Gate { patch: String, gate: FrameGate },
    Cnot { control: String, targets: Vec<String> },
    /// Non-destructive measurement through a surgery merge.
    Measure { patch: String, pauli: String },
    /// Destructive readout.
    Read { patch: String, pauli: String },
    MeasureProduct { aux: String, factors: Vec<(String, String)> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthSpec {
    control: String,
    targets: Vec<String>,
}

fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "cnot_truth_table" => Some(include_str!("../scripts/cnot_truth_table.json")),
        "multi_target" => Some(include_str!("../scripts/multi_target.json")),
        _ => None,
    }
}

fn parse_pauli(s: &str) -> Outcome<SignedPauli> {
    s.parse::<SignedPauli>().or_else(|e| fail(3, e.to_string()))
}

fn cmd_run(script: &str, seed: u64, trace_path: Option<&Path>) -> Outcome<()> {
    let text = match bundled(script) {
        Some(t) => t.to_string(),
        None => read_file(Path::new(script))?,
    };
    let script: Script = serde_json::from_str(&text).or_else(|e| fail(3, format!("malformed script: {e}")))?;
    let d = script.distance;
    let slots = script.patches.iter().map(|p| p.slot).max().map_or(0, |m| m + 1);
    let mut ws = Workspace::new(d, slots, seed)?;
    let mut ids: BTreeMap<String, PatchId> = BTreeMap::new();
    for p in &script.patches {
        let id = ws.place_data(&p.name, p.slot)?;
        for g in &p.frame {
            ws.apply_gate(id, *g);
        }
        ids.insert(p.name.clone(), id);
    }
    let id = |name: &str| -> Outcome<PatchId> { ids.get(name).copied().map_or_else(|| fail(3, format!("unknown patch {name:?}")), Ok) };
    let mut readouts = Vec::new();
    for step in &script.steps {
        match step {
            Step::Prepare { patch, state } => ws.prepare(id(patch)?, parse_pauli(state)?)?,
            Step::Gate { patch, gate } => ws.apply_gate(id(patch)?, *gate),
            Step::Cnot { control, targets } => {
                let t: Vec<PatchId> = targets.iter().map(|n| id(n)).collect::<Outcome<_>>()?;
                ws.multi_target_cnot(id(control)?, &t)?;
            }
            Step::Measure { patch, pauli } => {
                let v = ws.measure_logical(id(patch)?, parse_pauli(pauli)?)?;
                readouts.push(json!({ "patch": patch, "operator": pauli, "value": v }));
            }
            Step::Read { patch, pauli } => {
                let v = ws.read(id(patch)?, parse_pauli(pauli)?)?;
                readouts.push(json!({ "patch": patch, "operator": pauli, "value": v }));
            }
            Step::MeasureProduct { aux, factors } => {
                let f: Vec<(PatchId, SignedPauli)> = factors.iter().map(|(n, p)| Ok((id(n)?, parse_pauli(p)?))).collect::<Outcome<_>>()?;
                let v = ws.measure_pauli_product(id(aux)?, &f)?;
                readouts.push(json!({ "patch": aux, "operator": "product", "value": v }));
            }
        }
    }
    let frames: BTreeMap<String, String> = script
        .patches
        .iter()
        .filter(|p| ws.board.patch(ids[&p.name]).live)
        .map(|p| (p.name.clone(), ws.frame(ids[&p.name]).to_string()))
        .collect();
    let mut merges: BTreeMap<String, usize> = BTreeMap::new();
    for e in &ws.trace {
        if let TraceEvent::Merge { kind, .. } = e {
            *merges.entry(kind.name().to_string()).or_default() += 1;
        }
    }
    let mut summary = json!({
        "name": script.name,
        "config": { "seed": seed, "distance": d },
        "readouts": readouts,
        "final_frames": frames,
        "merges": merges,
    });
    let mut mismatches = 0;
    if let Some(tt) = &script.truth_table {
        let mut order = vec![tt.control.clone()];
        order.extend(tt.targets.iter().cloned());
        let decl = |n: &str| script.patches.iter().find(|p| p.name == n).map_or_else(|| fail(3, format!("unknown patch {n:?}")), Ok);
        let mut slots = Vec::new();
        let mut frames = Vec::new();
        for n in &order {
            let p = decl(n)?;
            slots.push(p.slot);
            frames.push(p.frame.clone());
        }
        let table = cnot_truth_table(d, &slots, &frames, seed)?;
        mismatches = table.rows.len() - table.matches();
        summary["truth_table"] = json!({
            "matches": table.matches(),
            "total": table.rows.len(),
            "report": format!("{}/{} matches", table.matches(), table.rows.len()),
            "rows": table.rows,
        });
    }
    match trace_path {
        Some(p) => write_or_print(Some(p), &ws.trace_json())?,
        None => summary["trace"] = serde_json::to_value(&ws.trace).expect("trace serializes"),
    }
    emit(pretty(&summary));
    if mismatches > 0 {
        return fail(4, format!("{mismatches} truth-table rows disagree with the oracle"));
    }
    Ok(())
}

fn load_layout(path: &Path) -> Outcome<SchedLayout> {
    let text = read_file(path)?;
    let value: Value = serde_json::from_str(&text).or_else(|e| fail(3, format!("{}: {e}", path.display())))?;
    if value.get("regions").is_some() {
        return Ok(SchedLayout::from_json(&text)?);
    }
    let patch = Patch::from_json(&text)?;
    let name = path.file_stem().map_or("layout".into(), |s| s.to_string_lossy().into_owned());
    Ok(SchedLayout::from_patch(&name, &patch))
}

fn cmd_schedule(layout: &Path, check: Option<&Path>, out: Option<&Path>, svg: Option<&Path>, faults: Option<usize>) -> Outcome<()> {
    let l = load_layout(layout)?;
    if let Some(path) = check {
        let s = Schedule::from_json(&read_file(path)?)?;
        let violations = validate_schedule(&s, &l);
        emit(pretty(&json!({ "layout": l.name, "violations": violations })));
        if !violations.is_empty() {
            return fail(4, format!("{} schedule violations", violations.len()));
        }
        return Ok(());
    }
    let s = match synthesize_schedule(&l) {
        Ok(s) => s,
        Err(e @ ScheduleError::Unsatisfiable { .. }) => {
            emit(pretty(&json!({ "layout": l.name, "unsatisfiable": e })));
            return fail(4, e.to_string());
        }
        Err(e) => return Err(Error::from(e).into()),
    };
    let violations = validate_schedule(&s, &l);
    let max_faults = faults.unwrap_or(3);
    let fault_report = if max_faults > 0 { Some(analyze_hook_faults(&l, &s, max_faults)?) } else { None };
    if let Some(p) = out {
        write_or_print(Some(p), &s.to_json())?;
    }
    if let Some(p) = svg {
        write_or_print(Some(p), &schedule_svg(&l, &s))?;
    }
    let mut report = json!({
        "layout": l.name,
        "steps": s.steps(),
        "violations": violations,
        "faults": fault_report,
    });
    if out.is_none() {
        report["schedule"] = serde_json::to_value(&s).expect("schedule serializes");
    }
    emit(pretty(&report));
    if !violations.is_empty() {
        return fail(4, "synthesized schedule fails validation");
    }
    Ok(())
}

fn cmd_distill(mode: DistillMode, d: usize, seed: u64) -> Outcome<()> {
    let report = match mode {
        DistillMode::PhysicalSkeleton => {
            let (run, ws) = distill_skeleton(d, seed, &[])?;
            let merges = ws.trace.iter().filter(|e| matches!(e, TraceEvent::Merge { .. })).count();
            json!({
                "mode": "physical-skeleton",
                "config": { "seed": seed, "distance": d },
                "cnot_count": run.cnot_count,
                "group_count": run.group_count,
                "merges": merges,
                "syndrome": run.syndrome,
                "accepted": run.accepted,
                "report": format!("{} CNOTs in {} groups", run.cnot_count, run.group_count),
            })
        }
        DistillMode::Oracle => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perfect = distill_reference(&magic_inputs_with_z_errors(&[]), &mut rng)?;
            let mut singles = 0;
            for a in 0..15 {
                singles += usize::from(!distill_reference(&magic_inputs_with_z_errors(&[a]), &mut rng)?.accepted);
            }
            let mut pairs = 0;
            let mut pair_total = 0;
            for a in 0..15 {
                for b in a + 1..15 {
                    pair_total += 1;
                    pairs += usize::from(!distill_reference(&magic_inputs_with_z_errors(&[a, b]), &mut rng)?.accepted);
                }
            }
            json!({
                "mode": "oracle",
                "config": { "seed": seed },
                "perfect": { "accepted": perfect.accepted, "fidelity": perfect.fidelity, "cnot_count": perfect.cnot_count },
                "single_errors": { "rejected": singles, "total": 15 },
                "double_errors": { "rejected": pairs, "total": pair_total },
            })
        }
    };
    emit(pretty(&report));
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Layout { kind, d, out, svg } => cmd_layout(kind, d, out.as_deref(), svg.as_deref()),
        Command::Run { script, trace } => cmd_run(&script, cli.seed, trace.as_deref()),
        Command::Schedule { layout, check, out, svg, faults } => cmd_schedule(&layout, check.as_deref(), out.as_deref(), svg.as_deref(), faults),
        Command::Distill { mode, d } => cmd_distill(mode, d, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
