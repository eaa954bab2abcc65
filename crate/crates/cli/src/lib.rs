//! Command-line driver: loads programs, runs their queries and prints the
//! answers in a line-oriented format. Also runs the regression corpus.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use gdasp::dual::{dualize, DualProgram};
use gdasp::engine::{Answer, Engine, EngineConfig, DEFAULT_MAX_DEPTH};
use gdasp::justify::{render_html, render_nl, render_text};
use gdasp::oracle::{check_answer, program_models, Verdict};
use gdasp::parser::{parse_program_with, parse_query_with, ParseError, ParseOptions};
use gdasp::print::print_query;
use gdasp::term::{Program, Query, VarGen};
use sha2::{Digest, Sha256};

pub const EXIT_ANSWERS: i32 = 0;
pub const EXIT_NO_ANSWERS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum TreeFormat {
    #[default]
    None,
    Text,
    Html,
}

#[derive(Debug, Parser)]
#[command(name = "gdasp", version, about = "Goal-directed answer set programming with linear constraints")]
pub struct Args {
    /// Program files, read in order.
    pub files: Vec<PathBuf>,

    /// Inline program text, appended after the files.
    #[arg(short = 'e', long = "expr", value_name = "PROGRAM", allow_hyphen_values = true)]
    pub inline: Vec<String>,

    /// Query to run instead of the queries in the program.
    #[arg(short, long)]
    pub query: Option<String>,

    /// Number of answers per query; 0 means all.
    #[arg(short = 's', value_name = "N", default_value_t = 1)]
    pub answers: usize,

    /// Print the justification of each answer.
    #[arg(long, value_enum, num_args = 0..=1, require_equals = true, default_missing_value = "text", default_value = "none")]
    pub tree: TreeFormat,

    /// Directory for HTML justifications.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub html_dir: PathBuf,

    /// Explain each answer in natural language.
    #[arg(long)]
    pub nl: bool,

    /// Print the dual program before solving.
    #[arg(long)]
    pub dump_dual: bool,

    /// Check every answer against the stable models of the grounded program.
    #[arg(long)]
    pub oracle_check: bool,

    /// Resolution depth limit per branch.
    #[arg(long, env = "GDASP_DEPTH", default_value_t = DEFAULT_MAX_DEPTH)]
    pub depth: usize,

    /// Run every program of a corpus directory against its golden output.
    #[arg(long, value_name = "DIR", conflicts_with_all = ["files", "inline", "query"])]
    pub corpus: Option<PathBuf>,

    /// With --corpus, rewrite the golden files instead of comparing.
    #[arg(long, requires = "corpus")]
    pub bless: bool,
}

#[derive(Clone, Debug)]
pub struct CliConfig {
    pub files: Vec<PathBuf>,
    pub inline: Vec<String>,
    pub query: Option<String>,
    /// `None` prints every answer.
    pub max_answers: Option<usize>,
    pub tree: TreeFormat,
    pub html_dir: PathBuf,
    pub nl: bool,
    pub dump_dual: bool,
    pub oracle_check: bool,
    pub depth_limit: usize,
    /// Print model literals sorted, as the golden files store them.
    pub normalize: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            files: Vec::new(),
            inline: Vec::new(),
            query: None,
            max_answers: Some(1),
            tree: TreeFormat::None,
            html_dir: PathBuf::from("."),
            nl: false,
            dump_dual: false,
            oracle_check: false,
            depth_limit: DEFAULT_MAX_DEPTH,
            normalize: false,
        }
    }
}

impl From<&Args> for CliConfig {
    fn from(a: &Args) -> Self {
        CliConfig {
            files: a.files.clone(),
            inline: a.inline.clone(),
            query: a.query.clone(),
            max_answers: (a.answers > 0).then_some(a.answers),
            tree: a.tree,
            html_dir: a.html_dir.clone(),
            nl: a.nl,
            dump_dual: a.dump_dual,
            oracle_check: a.oracle_check,
            depth_limit: a.depth,
            normalize: false,
        }
    }
}

/// Settings used for every corpus program.
pub fn corpus_config(file: &Path) -> CliConfig {
    CliConfig {
        files: vec![file.to_path_buf()],
        max_answers: None,
        tree: TreeFormat::Text,
        normalize: true,
        ..CliConfig::default()
    }
}

fn report_parse_errors(errors: &[ParseError], err: &mut dyn Write) {
    for e in errors {
        let _ = writeln!(err, "error: {}", e);
    }
}

/// Reads and parses every source of `config`, with the query override
/// replacing the in-file queries. Also returns the concatenated source text.
pub fn load(config: &CliConfig, err: &mut dyn Write) -> Result<(Program, String), i32> {
    if config.files.is_empty() && config.inline.is_empty() {
        let _ = writeln!(err, "error: no program given (pass files or -e)");
        return Err(EXIT_USAGE);
    }
    let mut sources: Vec<(String, String)> = Vec::new();
    for f in &config.files {
        match fs::read_to_string(f) {
            Ok(text) => sources.push((f.display().to_string(), text)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {}", f.display(), e);
                return Err(EXIT_USAGE);
            }
        }
    }
    for (i, text) in config.inline.iter().enumerate() {
        sources.push((format!("<expr {}>", i + 1), text.clone()));
    }

    let gen = VarGen::default();
    let mut program = Program::default();
    let mut errors = Vec::new();
    for (file, text) in &sources {
        let opts = ParseOptions { file: file.clone(), allow_internal: false };
        match parse_program_with(text, &opts, &gen) {
            Ok(p) => {
                program.rules.extend(p.rules);
                program.abducibles.extend(p.abducibles);
                program.templates.extend(p.templates);
                program.queries.extend(p.queries);
            }
            Err(es) => errors.extend(es),
        }
    }
    if let Some(q) = &config.query {
        let mut text = q.trim().to_string();
        if !text.starts_with("?-") {
            text = format!("?- {}", text);
        }
        if !text.ends_with('.') {
            text.push('.');
        }
        match parse_query_with(&text, &gen) {
            Ok(goals) => program.queries = vec![Query { goals, span: None }],
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        report_parse_errors(&errors, err);
        return Err(EXIT_USAGE);
    }
    let mut all = String::new();
    for (_, text) in &sources {
        all.push_str(text);
        all.push('\n');
    }
    if let Some(q) = &config.query {
        all.push_str(q);
    }
    Ok((program, all))
}

fn html_name(source: &str, query: &str, k: usize) -> String {
    let digest = Sha256::new().chain_update(source.as_bytes()).chain_update(query.as_bytes()).finalize();
    let hex: String = digest.iter().take(6).map(|b| format!("{:02x}", b)).collect();
    format!("{}-answer{}.html", hex, k)
}

struct Printed {
    text: String,
    html: Option<(String, String)>,
}

fn print_answer(
    config: &CliConfig,
    dual: &DualProgram,
    answer: &Answer,
    k: usize,
    source: &str,
    query_text: &str,
) -> Printed {
    let r = answer.render();
    let mut s = String::new();
    writeln!(s, "ANSWER {}", k).unwrap();
    writeln!(s, "BINDINGS:").unwrap();
    for b in &r.bindings {
        writeln!(s, "  {}", b).unwrap();
    }
    writeln!(s, "CONSTRAINTS:").unwrap();
    for c in &r.constraints {
        writeln!(s, "  {}", c).unwrap();
    }
    let mut model = r.model.clone();
    if config.normalize {
        model.sort();
    }
    if model.is_empty() {
        writeln!(s, "MODEL: {{ }}").unwrap();
    } else {
        writeln!(s, "MODEL: {{ {} }}", model.join(", ")).unwrap();
    }
    if !dual.abducibles.is_empty() {
        let mut namer = r.namer.clone();
        let mut p = gdasp::print::Printer::new(&mut namer);
        let abduced: Vec<String> = answer.abduced.iter().map(|l| p.literal(l)).collect();
        if abduced.is_empty() {
            writeln!(s, "ABDUCED: {{ }}").unwrap();
        } else {
            writeln!(s, "ABDUCED: {{ {} }}", abduced.join(", ")).unwrap();
        }
    }
    let mut html = None;
    match config.tree {
        TreeFormat::None => {}
        TreeFormat::Text => {
            writeln!(s, "JUSTIFICATION:").unwrap();
            let mut namer = r.namer.clone();
            s.push_str(&render_text(&answer.justification, &mut namer, None));
        }
        TreeFormat::Html => {
            let name = html_name(source, query_text, k);
            let mut namer = r.namer.clone();
            let page = render_html(&answer.justification, &mut namer, &format!("{} answer {}", query_text, k));
            let path = config.html_dir.join(&name);
            writeln!(s, "JUSTIFICATION: {}", path.display()).unwrap();
            html = Some((path.display().to_string(), page));
        }
    }
    if config.nl {
        writeln!(s, "EXPLANATION:").unwrap();
        let mut namer = r.namer.clone();
        s.push_str(&render_nl(&answer.justification, &dual.templates, &mut namer));
    }
    Printed { text: s, html }
}

/// Runs every query of the configured program, writing answers to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (program, source) = match load(config, err) {
        Ok(x) => x,
        Err(code) => return code,
    };
    if program.queries.is_empty() && !config.dump_dual {
        let _ = writeln!(err, "error: no query (add `?- goal.` to the program or pass -q)");
        return EXIT_USAGE;
    }
    let dual = match dualize(&program) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            return EXIT_USAGE;
        }
    };
    if config.dump_dual {
        let _ = write!(out, "{}", dual.dump());
        if program.queries.is_empty() {
            return EXIT_ANSWERS;
        }
    }
    let models = if config.oracle_check {
        match program_models(&program) {
            Ok(m) => {
                let _ = writeln!(out, "ORACLE MODELS {}", m.len());
                Some(m)
            }
            Err(e) => {
                let _ = writeln!(err, "error: oracle: {}", e);
                return EXIT_ENGINE;
            }
        }
    } else {
        None
    };

    let engine = Engine::with_config(&dual, EngineConfig { max_depth: config.depth_limit });
    let mut code = EXIT_ANSWERS;
    for query in &program.queries {
        let query_text = print_query(query);
        let _ = writeln!(out, "QUERY {}", query_text);
        let mut solutions = engine.solve(&query.goals);
        let mut count = 0;
        let mut failed = false;
        while config.max_answers.map_or(true, |m| count < m) {
            match solutions.next() {
                None => break,
                Some(Ok(answer)) => {
                    count += 1;
                    let printed = print_answer(config, &dual, &answer, count, &source, &query_text);
                    let _ = out.write_all(printed.text.as_bytes());
                    if let Some((path, page)) = printed.html {
                        if let Err(e) = fs::create_dir_all(&config.html_dir).and_then(|_| fs::write(&path, page)) {
                            let _ = writeln!(err, "error: cannot write {}: {}", path, e);
                            failed = true;
                        }
                    }
                    if let Some(models) = &models {
                        let line = match check_answer(&answer, models) {
                            Verdict::Pass(i) => format!("ORACLE PASS (model {})", i + 1),
                            Verdict::Fail => "ORACLE FAIL".to_string(),
                        };
                        let _ = writeln!(out, "{}", line);
                    }
                }
                Some(Err(e)) => {
                    let _ = writeln!(err, "error: {}", e);
                    failed = true;
                    break;
                }
            }
        }
        let _ = writeln!(out, "TOTAL {}", count);
        if solutions.depth_exceeded() {
            let _ = writeln!(err, "warning: depth limit {} reached; some branches were pruned", config.depth_limit);
            if count == 0 {
                failed = true;
            }
        }
        code = code.max(if failed {
            EXIT_ENGINE
        } else if count == 0 {
            EXIT_NO_ANSWERS
        } else {
            EXIT_ANSWERS
        });
    }
    code
}

/// Output of one corpus program under the corpus settings, followed by a
/// trailing `EXIT n` line.
pub fn corpus_output(file: &Path) -> String {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(&corpus_config(file), &mut out, &mut err);
    let mut text = String::from_utf8_lossy(&out).into_owned();
    text.push_str(&String::from_utf8_lossy(&err));
    writeln!(text, "EXIT {}", code).unwrap();
    text
}

#[derive(Clone, Debug, Default)]
pub struct CorpusReport {
    pub programs: usize,
    /// File name and the first differing line.
    pub failures: Vec<(String, String)>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn first_difference(expected: &str, actual: &str) -> String {
    let mut e = expected.lines();
    let mut a = actual.lines();
    let mut line = 1;
    loop {
        match (e.next(), a.next()) {
            (None, None) => return "outputs differ in line endings".to_string(),
            (x, y) if x == y => line += 1,
            (x, y) => {
                return format!(
                    "line {}: expected `{}`, got `{}`",
                    line,
                    x.unwrap_or("<end of file>"),
                    y.unwrap_or("<end of file>")
                )
            }
        }
    }
}

/// The `.gdasp` programs of a corpus directory, sorted by name.
pub fn corpus_programs(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "gdasp"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs each program and compares its output with the paired `.expected`
/// file, or rewrites the golden files when `bless` is set.
pub fn run_corpus(dir: &Path, bless: bool, out: &mut dyn Write) -> io::Result<CorpusReport> {
    let files = corpus_programs(dir)?;
    let mut report = CorpusReport { programs: files.len(), failures: Vec::new() };
    if files.is_empty() {
        writeln!(out, "warning: 0 programs in {}", dir.display())?;
        return Ok(report);
    }
    for file in &files {
        let name = file.file_name().unwrap().to_string_lossy().into_owned();
        let actual = corpus_output(file);
        let golden = file.with_extension("expected");
        if bless {
            fs::write(&golden, &actual)?;
            writeln!(out, "BLESS {}", name)?;
            continue;
        }
        match fs::read_to_string(&golden) {
            Ok(expected) if expected == actual => writeln!(out, "PASS {}", name)?,
            Ok(expected) => {
                let diff = first_difference(&expected, &actual);
                writeln!(out, "FAIL {}: {}", name, diff)?;
                report.failures.push((name, diff));
            }
            Err(_) => {
                let diff = format!("missing golden file {}", golden.display());
                writeln!(out, "FAIL {}: {}", name, diff)?;
                report.failures.push((name, diff));
            }
        }
    }
    writeln!(out, "{} programs, {} failed", report.programs, report.failures.len())?;
    Ok(report)
}
