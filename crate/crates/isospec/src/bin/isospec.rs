//! Command-line front end: validation, spectra, transplantation, counts,
//! topology and the full reproduction run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use isospec::commens::{self, ChamberVector, CoverSpec};
use isospec::enumerate::{Realization, Traversal};
use isospec::reproduce::{self, Expectations, Settings};
use isospec::spectrum::{self, build_spectrum, Mode};
use isospec::transplant::{
    beta_decomposition, branch_offset, count_identical_per_copy, derive_transition_table, junction_flags, paired_counts,
    transplant_amalgam, transplant_word, verify_bijection,
};
use isospec::{BlockComplex, Error};

#[derive(Parser)]
#[command(name = "isospec", version, about = "Length spectra of octagon-block surfaces and amalgams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Length cutoff for enumeration.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Maximum number of side crossings (default: ceil(cutoff / c)).
    #[arg(long, global = true)]
    max_crossings: Option<usize>,
    /// Band tolerance for lengths.
    #[arg(long, global = true, default_value_t = spectrum::DEFAULT_TOL)]
    tol: f64,
    /// Block parameters as b,c.
    #[arg(long, global = true, value_parser = parse_metric)]
    metric: Option<(f64, f64)>,
    /// Compare weak spectra (lengths without multiplicity).
    #[arg(long, global = true)]
    weak: bool,
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for enumeration.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Expected verdicts (default: the bundled file).
    #[arg(long, global = true)]
    expectations: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Load and check complexes, printing their topology and geometry.
    Validate { complexes: Vec<String> },
    /// Length spectrum as CSV.
    Spectrum { complex: String },
    /// Compare the spectra of two complexes.
    Compare { first: String, second: String },
    /// Transplant crossing words from one complex to another.
    Transplant {
        first: String,
        second: String,
        /// A single word, e.g. "1:2[Atl>Atr] 1:2[Abr>Abl]".
        #[arg(long)]
        word: Option<String>,
    },
    /// Identical-copy counts of transversal geodesics in a pair of amalgams.
    CountIdentical {
        first: String,
        second: String,
        #[arg(long)]
        word: Option<String>,
    },
    /// Offset transitions between two surfaces built from the same blocks.
    DeriveTable { first: String, second: String },
    /// Cut along the branch locus and all systoles.
    SystoleCut { complex: String },
    /// Chambers of one amalgam, or the compatibility verdict for two.
    Chambers { first: String, second: Option<String> },
    /// Validate cover specifications and apply the chamber ratio test.
    Commensurability {
        #[arg(long)]
        first: Option<PathBuf>,
        #[arg(long)]
        second: Option<PathBuf>,
    },
    /// Run every acceptance criterion.
    ReproduceAll {
        /// Comma-separated subset of criteria.
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
    },
}

fn parse_metric(s: &str) -> Result<(f64, f64), String> {
    let (b, c) = s.split_once(',').ok_or("expected b,c")?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad b: {b}"))?;
    let c: f64 = c.trim().parse().map_err(|_| format!("bad c: {c}"))?;
    Ok((b, c))
}

#[derive(Serialize)]
struct Source {
    name: String,
    origin: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    command: Vec<String>,
    complexes: Vec<Source>,
    metric: Option<(f64, f64)>,
    cutoff: Option<f64>,
    max_crossings: Option<usize>,
    tol: f64,
    workers: usize,
    verdicts: Vec<String>,
    seconds: f64,
}

enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Run {
    cli: Cli,
    expectations: Expectations,
    sources: Vec<Source>,
    verdicts: Vec<String>,
    artifacts: Vec<(String, String)>,
    mismatch: bool,
}

fn sha256(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Run {
    /// Load a bundled complex by name or a description from a file.
    fn complex(&mut self, name: &str) -> Result<(String, BlockComplex), Failure> {
        let (text, origin) = match isospec::bundled_text(name) {
            Some(t) => (t.to_string(), "bundled".to_string()),
            None => {
                let text = std::fs::read_to_string(name).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
                (text, name.to_string())
            }
        };
        let cx = BlockComplex::load(&text).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
        let cx = match self.cli.metric {
            Some((b, c)) => cx.with_metric(b, c)?,
            None => cx,
        };
        let label = Path::new(name).file_stem().map_or(name.to_string(), |s| s.to_string_lossy().into_owned());
        self.sources.push(Source { name: label.clone(), origin, sha256: sha256(&text) });
        Ok((label, cx))
    }

    fn realize(&mut self, name: &str) -> Result<(String, Realization), Failure> {
        let (label, cx) = self.complex(name)?;
        Ok((label, Realization::new(cx)?))
    }

    fn cutoff(&self, r: &Realization, multiple: f64) -> f64 {
        self.cli.cutoff.unwrap_or(multiple * r.cx().c)
    }

    fn crossings(&self, r: &Realization, cutoff: f64) -> usize {
        self.cli.max_crossings.unwrap_or_else(|| spectrum::crossing_bound(cutoff, r.cx().c))
    }

    /// Record a verdict, checking it against a declared expectation.
    fn verdict(&mut self, text: String, expected: Option<bool>, got: bool) {
        let note = match expected {
            Some(e) if e != got => {
                self.mismatch = true;
                " (does not match the declared expectation)"
            }
            Some(_) => " (as expected)",
            None => "",
        };
        self.verdicts.push(format!("{text}{note}"));
    }

    fn emit(&mut self, file: &str, text: String) {
        if self.cli.out.is_none() {
            print!("{text}");
        }
        self.artifacts.push((file.to_string(), text));
    }
}

fn validate(run: &mut Run, names: &[String]) -> Result<(), Failure> {
    let names: Vec<String> =
        if names.is_empty() { isospec::BUNDLED.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    let mut s = String::from("| complex | cells | blocks | chi | amalgam | a | closure residual |\n|---|---|---|---|---|---|---|\n");
    for n in &names {
        let (label, r) = run.realize(n)?;
        let g = r.geometry.report();
        writeln!(
            s,
            "| {label} | {} | {} | {} | {} | {:.9} | {:.1e} |",
            r.cx().cells.len(),
            r.cx().block_count(),
            r.cx().euler_characteristic(),
            r.cx().is_amalgam(),
            g.a,
            g.closure_residual
        )
        .unwrap();
        run.verdict(format!("{label}: valid"), None, true);
    }
    run.emit("validate.md", s);
    Ok(())
}

fn spectrum_cmd(run: &mut Run, name: &str) -> Result<(), Failure> {
    let (label, r) = run.realize(name)?;
    let cutoff = run.cutoff(&r, 8.0);
    let n = run.crossings(&r, cutoff);
    let sp = build_spectrum(&r, cutoff, run.cli.tol, Some(n));
    run.verdict(format!("{label}: {} curves in {} bands up to {cutoff}", sp.total(), sp.bands.len()), None, true);
    if run.cli.out.is_some() {
        run.artifacts.push((format!("spectrum_{label}.md"), sp.to_markdown()));
    }
    run.emit(&format!("spectrum_{label}.csv"), sp.to_csv());
    Ok(())
}

fn compare_cmd(run: &mut Run, a: &str, b: &str) -> Result<(), Failure> {
    let (la, ra) = run.realize(a)?;
    let (lb, rb) = run.realize(b)?;
    let cutoff = run.cutoff(&ra, 8.0);
    let n = run.crossings(&ra, cutoff).max(run.crossings(&rb, cutoff));
    let mode = if run.cli.weak { Mode::Weak } else { Mode::Full };
    let sa = build_spectrum(&ra, cutoff, run.cli.tol, Some(n));
    let sb = build_spectrum(&rb, cutoff, run.cli.tol, Some(n));
    let cmp = spectrum::compare(&sa, &sb, mode)?;
    let expected = run.expectations.spectrum(&la, &lb, mode);
    run.verdict(format!("{la} vs {lb} ({mode:?}): {}", if cmp.equal { "equal" } else { "different" }), expected, cmp.equal);
    run.emit(&format!("compare_{la}_{lb}.md"), spectrum::comparison_markdown(&sa, &sb, &cmp));
    Ok(())
}

fn words(run: &Run, r: &Realization, word: &Option<String>, transversal: bool) -> Result<Vec<(Vec<Traversal>, f64)>, Failure> {
    if let Some(w) = word {
        let w = r.parse_word(w)?;
        let g = r.straighten(&w)?;
        return Ok(vec![(w, g.length)]);
    }
    let cutoff = run.cutoff(r, 8.0);
    let n = run.crossings(r, cutoff);
    let gs = if transversal { r.transversal_geodesics(cutoff, n) } else { r.geodesics(cutoff, n) };
    Ok(gs.into_iter().filter(|g| !g.word.is_empty()).map(|g| (g.word, g.length)).collect())
}

fn transplant_cmd(run: &mut Run, a: &str, b: &str, word: &Option<String>) -> Result<(), Failure> {
    let (la, ra) = run.realize(a)?;
    let (lb, rb) = run.realize(b)?;
    let amalgam = ra.cx().is_amalgam();
    let list = words(run, &ra, word, amalgam)?;
    let table = if amalgam { None } else { Some(derive_transition_table(ra.cx(), rb.cx())?) };
    let mut s = format!("# Transplantation {la} -> {lb}\n\n| word | length | image | image length |\n|---|---|---|---|\n");
    let mut failures = 0;
    for (w, len) in &list {
        let image = if amalgam { transplant_amalgam(&ra, &rb, w).map(|t| t.word) } else { transplant_word(&ra, &rb, w, table.as_ref()).map(|t| t.word) };
        match image.and_then(|img| rb.straighten(&img).map(|g| (img, g.length))) {
            Ok((img, l)) => {
                if (l - len).abs() > run.cli.tol {
                    failures += 1;
                }
                writeln!(s, "| {} | {len:.9} | {} | {l:.9} |", ra.word_string(w), rb.word_string(&img)).unwrap();
            }
            Err(e) => {
                failures += 1;
                writeln!(s, "| {} | {len:.9} | {e} | - |", ra.word_string(w)).unwrap();
            }
        }
    }
    if word.is_none() && !amalgam {
        let partner = words(run, &rb, &None, false)?;
        let ws: Vec<_> = list.iter().map(|x| x.0.clone()).collect();
        let ps: Vec<_> = partner.iter().map(|x| x.0.clone()).collect();
        let rep = verify_bijection(&ra, &rb, &ws, &ps, table.as_ref());
        writeln!(s, "\nbijection: {} (injective {}, into partner {}, round trip {})", rep.ok(), rep.injective, rep.into_partner, rep.round_trip).unwrap();
        if !rep.ok() {
            failures += 1;
        }
    }
    run.verdict(format!("{la} -> {lb}: {} words, {failures} failures", list.len()), Some(true), failures == 0);
    run.emit(&format!("transplant_{la}_{lb}.md"), s);
    Ok(())
}

fn count_cmd(run: &mut Run, a: &str, b: &str, word: &Option<String>) -> Result<(), Failure> {
    let (la, ra) = run.realize(a)?;
    let (lb, rb) = run.realize(b)?;
    if !ra.cx().is_amalgam() || !rb.cx().is_amalgam() {
        return Err(Failure::Input("count-identical needs two amalgams".into()));
    }
    let list = words(run, &ra, word, true)?;
    let mut s = format!("# Identical copies {la} vs {lb}\n\n| word | length | pieces | count | closed form | partner count |\n|---|---|---|---|---|---|\n");
    let mut unequal = 0;
    let three_copies = ra.cx().copies > 2;
    let offset = branch_offset(ra.cx(), rb.cx());
    for (w, len) in &list {
        let row = if three_copies {
            transplant_amalgam(&ra, &rb, w).and_then(|t| {
                let p1 = beta_decomposition(&ra, w)?;
                let p2 = beta_decomposition(&rb, &t.word)?;
                let c1 = count_identical_per_copy(&ra, &p1, &junction_flags(&ra, &p1));
                let c2 = count_identical_per_copy(&rb, &p2, &junction_flags(&rb, &p2));
                Ok((p1.len(), c1, None, c2))
            })
        } else {
            let offset = offset.ok_or_else(|| Error::ClosureFailure("no block offset matches the branch loci".into()))?;
            paired_counts(&ra, &rb, w, offset).map(|(h, t)| (h.pieces, h.search, h.formula, t.search))
        };
        match row {
            Ok((p, c1, f, c2)) => {
                unequal += (c1 != c2) as usize;
                let f = f.map_or("-".to_string(), |x| x.to_string());
                writeln!(s, "| {} | {len:.9} | {p} | {c1} | {f} | {c2} |", ra.word_string(w)).unwrap();
            }
            Err(e) => writeln!(s, "| {} | {len:.9} | - | {e} | - | - |", ra.word_string(w)).unwrap(),
        }
    }
    run.verdict(format!("{la} vs {lb}: {} geodesics, {unequal} with different counts", list.len()), None, unequal == 0);
    run.emit(&format!("identical_{la}_{lb}.md"), s);
    Ok(())
}

fn table_cmd(run: &mut Run, a: &str, b: &str) -> Result<(), Failure> {
    let (la, ca) = run.complex(a)?;
    let (lb, cb) = run.complex(b)?;
    let t = derive_transition_table(&ca, &cb)?;
    let mut s = format!("# Offset transitions {la} -> {lb}\n\n| class | 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 |\n|---|---|---|---|---|---|---|---|---|\n");
    let mut rows: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for ((class, _), v) in &t.entries {
        rows.entry(format!("{class:?}")).or_default().push(v.map_or("-".into(), |x| x.to_string()));
    }
    for (class, v) in rows {
        writeln!(s, "| {class} | {} |", v.join(" | ")).unwrap();
    }
    let violations = t.rule_violations();
    for v in &violations {
        writeln!(s, "\n- {v}").unwrap();
    }
    run.verdict(format!("{la} -> {lb}: {} rule violations", violations.len()), None, violations.is_empty());
    run.emit(&format!("table_{la}_{lb}.md"), s);
    Ok(())
}

fn components_md(cs: &[isospec::complex::Component]) -> String {
    let mut s = String::from("| genus | boundaries | chi | cells |\n|---|---|---|---|\n");
    for c in cs {
        let g = c.genus.map_or("-".into(), |g| g.to_string());
        writeln!(s, "| {g} | {} | {} | {} |", c.boundaries, c.euler, c.cells.len()).unwrap();
    }
    s
}

fn systole_cmd(run: &mut Run, name: &str) -> Result<(), Failure> {
    let (label, cx) = run.complex(name)?;
    let sys = cx.combinatorial_systoles();
    let cut = cx.systole_cut();
    let s = format!("# Systole cut of {label}\n\n{} systoles, {} components\n\n{}", sys.len(), cut.len(), components_md(&cut));
    run.verdict(format!("{label}: {} components", cut.len()), None, true);
    run.emit(&format!("systole_cut_{label}.md"), s);
    Ok(())
}

fn chambers_cmd(run: &mut Run, a: &str, b: &Option<String>) -> Result<(), Failure> {
    let (la, ca) = run.complex(a)?;
    let cha = ca.chambers()?;
    let mut s = format!("# Chambers of {la}\n\n{}", components_md(&cha));
    match b {
        None => run.verdict(format!("{la}: {} chambers", cha.len()), None, true),
        Some(b) => {
            let (lb, cb) = run.complex(b)?;
            let chb = cb.chambers()?;
            let kinds = |v: &[isospec::complex::Component]| {
                let mut k: Vec<_> = v.iter().map(|c| c.kind()).collect();
                k.sort();
                k
            };
            let compatible = kinds(&cha) == kinds(&chb);
            write!(s, "\n# Chambers of {lb}\n\n{}", components_md(&chb)).unwrap();
            let expected = run.expectations.chambers_compatible(&la, &lb);
            let text = format!(
                "{la} vs {lb}: {} ({} vs {} chambers)",
                if compatible { "homeomorphism-compatible" } else { "not-homeomorphism-compatible" },
                cha.len(),
                chb.len()
            );
            writeln!(s, "\nverdict: **{text}**").unwrap();
            run.verdict(text, expected, compatible);
        }
    }
    run.emit(&format!("chambers_{la}.md"), s);
    Ok(())
}

fn commens_cmd(run: &mut Run, first: &Option<PathBuf>, second: &Option<PathBuf>) -> Result<(), Failure> {
    let read = |p: &Option<PathBuf>, default: &str| -> Result<(String, String), Failure> {
        match p {
            Some(p) => Ok((std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?, p.display().to_string())),
            None => Ok((default.to_string(), "bundled".into())),
        }
    };
    let (ta, oa) = read(first, commens::X1_HAT)?;
    let (tb, ob) = read(second, commens::X2_HAT)?;
    let (a, b) = (CoverSpec::parse(&ta)?, CoverSpec::parse(&tb)?);
    run.sources.push(Source { name: a.name.clone(), origin: oa, sha256: sha256(&ta) });
    run.sources.push(Source { name: b.name.clone(), origin: ob, sha256: sha256(&tb) });
    let (va, vb): (ChamberVector, ChamberVector) = (commens::validate_cover(&a)?, commens::validate_cover(&b)?);
    let verdict = commens::ratio_test(&va, &vb)?;
    let expected = (first.is_none() && second.is_none()).then_some(run.expectations.commensurable);
    run.verdict(
        format!("{} vs {}: {}", a.name, b.name, if verdict.compatible { "ratio test compatible" } else { "not commensurable" }),
        expected,
        verdict.compatible,
    );
    run.emit("commensurability.md", commens::report(&a, &va, &b, &vb, &verdict));
    Ok(())
}

fn reproduce_cmd(run: &mut Run, criteria: &Option<Vec<u8>>) -> Result<(), Failure> {
    let mut settings = Settings { tol: run.cli.tol, expectations: run.expectations.clone(), ..Settings::default() };
    if let Some(m) = run.cli.metric {
        settings.metric = m;
    }
    for name in isospec::BUNDLED {
        let text = isospec::bundled_text(name).unwrap_or_default();
        run.sources.push(Source { name: name.to_string(), origin: "bundled".into(), sha256: sha256(text) });
        BlockComplex::load(text).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
    }
    let progress = |r: &reproduce::Row| eprintln!("{}", r.line());
    let rows = match criteria {
        Some(ids) => ids.iter().filter_map(|&id| reproduce::criterion(id, &settings)).inspect(progress).collect(),
        None => reproduce::run_all(&settings, progress),
    };
    for r in &rows {
        run.verdict(format!("criterion {}: {}", r.id, if r.passed() { "pass" } else { "fail" }), Some(true), r.passed());
    }
    let md = reproduce::markdown(&rows, &settings);
    run.emit("reproduce.md", md);
    Ok(())
}

fn execute(run: &mut Run) -> Result<(), Failure> {
    let command = std::mem::replace(&mut run.cli.command, Command::Validate { complexes: vec![] });
    match &command {
        Command::Validate { complexes } => validate(run, complexes),
        Command::Spectrum { complex } => spectrum_cmd(run, complex),
        Command::Compare { first, second } => compare_cmd(run, first, second),
        Command::Transplant { first, second, word } => transplant_cmd(run, first, second, word),
        Command::CountIdentical { first, second, word } => count_cmd(run, first, second, word),
        Command::DeriveTable { first, second } => table_cmd(run, first, second),
        Command::SystoleCut { complex } => systole_cmd(run, complex),
        Command::Chambers { first, second } => chambers_cmd(run, first, second),
        Command::Commensurability { first, second } => commens_cmd(run, first, second),
        Command::ReproduceAll { criteria } => reproduce_cmd(run, criteria),
    }
}

fn write_out(run: &Run, dir: &Path, manifest: &Manifest) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (file, text) in &run.artifacts {
        std::fs::write(dir.join(file), text)?;
    }
    let json = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("manifest.json"), json + "\n")
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let expectations = match &cli.expectations {
        None => Expectations::bundled(),
        Some(p) => match std::fs::read_to_string(p).map_err(|e| Error::Io(e.to_string())).and_then(|t| Expectations::parse(&t)) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
    };
    let mut run = Run { cli, expectations, sources: Vec::new(), verdicts: Vec::new(), artifacts: Vec::new(), mismatch: false };
    if let Err(Failure::Input(msg)) = execute(&mut run) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    for v in &run.verdicts {
        eprintln!("verdict: {v}");
    }
    if let Some(dir) = run.cli.out.clone() {
        let manifest = Manifest {
            command: std::env::args().collect(),
            complexes: std::mem::take(&mut run.sources),
            metric: run.cli.metric,
            cutoff: run.cli.cutoff,
            max_crossings: run.cli.max_crossings,
            tol: run.cli.tol,
            workers: rayon::current_num_threads(),
            verdicts: run.verdicts.clone(),
            seconds: start.elapsed().as_secs_f64(),
        };
        if let Err(e) = write_out(&run, &dir, &manifest) {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    if run.mismatch {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
