//! The `oml` command line.
//!
//! Exit codes: 0 when no diagnostic has error severity, 1 when one does,
//! 2 for usage and I/O failures. Diagnostics go to the error stream and
//! artifacts to the output stream or the `-o` file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use oml_core::calculus::{parse_expr, type_expr, Composability, Evaluator};
use oml_core::checker::{self, CheckOptions, Enforcement};
use oml_core::dtd::compile_dtd;
use oml_core::{diagnostic, Diagnostic, KnowledgeBase, Mode, Ontology, Severity};

use crate::error::Error;
use crate::interop::{rdf, xol};
use crate::load::{load_document, FileResolver, LoadOptions};
use crate::xmlio::{parse_oml, serialize, serialize_collection, serialize_ontology};
use crate::{dtd, styles};

#[derive(Parser, Debug)]
#[command(name = "oml", version, about = "Read, check, translate and exchange OML ontologies and collections")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Reject unresolved references and unrepaired classifications. The
    /// default is taken from OML_STRICT (1/true/yes/on) when neither flag is
    /// given.
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,
    /// Keep placeholders and infer missing classifications (the default).
    #[arg(long, global = true)]
    lenient: bool,
    /// Accept higher-order types (types as instances, own slots).
    #[arg(long, global = true)]
    higher_order: bool,
    /// Resolve an extends/ontology URI to a local file.
    #[arg(long = "map", value_name = "URI=PATH", global = true, value_parser = parse_mapping)]
    map: Vec<(String, PathBuf)>,
    /// Diagnostic format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check syntax and grammar, then echo the canonical serialization.
    Parse {
        file: PathBuf,
        /// Ontology a collection is read against.
        #[arg(long)]
        ontology: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Run every checker pass. Collections are checked together with the
    /// ontology before them (or the one they name).
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        ontology: Option<PathBuf>,
        /// Also report subtype suggestions.
        #[arg(long)]
        lint: bool,
    },
    /// Compile an ontology into its domain-specific DTD.
    CompileDtd {
        ontology: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Render a generic collection in the specific style.
    ToSpecific {
        ontology: PathBuf,
        collection: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Read a specific-style document and write the generic collection.
    ToGeneric {
        ontology: PathBuf,
        document: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Validate a document or fragment against a DTD.
    ValidateDtd { dtd: PathBuf, document: PathBuf },
    /// Export an ontology and its collections as triples.
    ExportRdf {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Import triples; the ontology goes to the output, the collection to
    /// `--collection`.
    ImportRdf {
        file: PathBuf,
        /// Ontology name (default: the file stem).
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_name = "FILE")]
        collection: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Export an ontology and its collections as an XOL module.
    ExportXol {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Emit documentation and slot-inverse elements.
        #[arg(long)]
        extended: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Import an XOL module; the ontology goes to the output, the
    /// collection to `--collection`.
    ImportXol {
        file: PathBuf,
        /// Ontology whose function types restore functions.
        #[arg(long)]
        hint: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        collection: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Suggest subtype axioms implied by extension inclusion.
    Lint { ontology: PathBuf, collection: PathBuf },
    /// Evaluate relation expressions and print their extensions.
    Calc {
        ontology: PathBuf,
        collection: Option<PathBuf>,
        /// Expression such as `compose(genre, transpose(genre))`.
        #[arg(short, long = "expr", required = true)]
        exprs: Vec<String>,
        /// Allow composition when the target of the first is a subtype of the
        /// source of the second.
        #[arg(long)]
        subtype_composable: bool,
    },
}

fn parse_mapping(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((u, p)) if !u.is_empty() && !p.is_empty() => Ok((u.to_string(), PathBuf::from(p))),
        _ => Err(format!("expected URI=PATH, got `{s}`")),
    }
}

/// Why a command stopped early.
enum Failure {
    /// Usage or I/O problem (exit 2).
    Fatal(String),
    /// Errors reported as diagnostics (exit 1).
    Diagnostics(Vec<Diagnostic>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Fatal(e.to_string()),
            e => Failure::Diagnostics(vec![e.to_diagnostic()]),
        }
    }
}

type Outcome = Result<Vec<Diagnostic>, Failure>;

struct Context<'a> {
    global: &'a Global,
    strict: bool,
    out: &'a mut dyn Write,
}

fn strict_by_default() -> bool {
    std::env::var("OML_STRICT")
        .map(|v| matches!(v.trim().to_ascii_lowercase().as_str(), "1" | "true" | "yes" | "on"))
        .unwrap_or(false)
}

impl Context<'_> {
    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            mode: if self.strict { Mode::Strict } else { Mode::Lenient },
            higher_order: self.global.higher_order,
        }
    }

    fn check_options(&self, lint: bool) -> CheckOptions {
        CheckOptions {
            enforcement: if self.strict {
                Enforcement::Strict
            } else {
                Enforcement::Complete
            },
            lint,
        }
    }

    fn resolver(&self, file: &Path) -> FileResolver {
        FileResolver {
            map: self.global.map.iter().cloned().collect::<BTreeMap<_, _>>(),
            base: file.parent().map(Path::to_path_buf),
        }
    }

    fn read(&self, path: &Path) -> Result<String, Failure> {
        std::fs::read_to_string(path).map_err(|e| Failure::Fatal(format!("{}: {e}", path.display())))
    }

    fn emit(&mut self, out: &Output, text: &str) -> Result<(), Failure> {
        match &out.output {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Fatal(format!("{}: {e}", p.display()))),
            None => self
                .out
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Fatal(format!("standard output: {e}"))),
        }
    }

    fn write_file(&self, path: &Path, text: &str) -> Result<(), Failure> {
        std::fs::write(path, text).map_err(|e| Failure::Fatal(format!("{}: {e}", path.display())))
    }

    /// Load an OML file; a collection binds to `ontology` when given.
    fn load(&self, path: &Path, ontology: Option<Ontology>) -> Result<KnowledgeBase, Failure> {
        let text = self.read(path)?;
        let name = path.display().to_string();
        let options = self.load_options();
        let doc = parse_oml(&text, &name, options.parse_options())?;
        Ok(load_document(&doc, &self.resolver(path), options, ontology)?)
    }

    fn load_ontology(&self, path: &Path) -> Result<Ontology, Failure> {
        let kb = self.load(path, None)?;
        if !kb.collections.is_empty() {
            return Err(Failure::Fatal(format!("{}: expected an ontology, found a collection", path.display())));
        }
        Ok(kb.ontology)
    }

    /// An ontology file followed by collection files, as one knowledge base.
    fn load_kb(&self, files: &[PathBuf]) -> Result<KnowledgeBase, Failure> {
        let mut kb: Option<KnowledgeBase> = None;
        for f in files {
            let loaded = self.load(f, kb.as_ref().map(|k| k.ontology.clone()))?;
            kb = Some(match kb {
                Some(mut k) if !loaded.collections.is_empty() => {
                    k.collections.extend(loaded.collections);
                    k
                }
                _ => loaded,
            });
        }
        kb.ok_or_else(|| Failure::Fatal("no input files".into()))
    }

    fn parse(&mut self, file: &Path, ontology: Option<&Path>, out: &Output) -> Outcome {
        let text = self.read(file)?;
        let name = file.display().to_string();
        let options = self.load_options();
        let doc = parse_oml(&text, &name, options.parse_options())?;
        let ont = ontology.map(|o| self.load_ontology(o)).transpose()?;
        load_document(&doc, &self.resolver(file), options, ont)?;
        self.emit(out, &serialize(&doc))?;
        Ok(Vec::new())
    }

    fn check(&mut self, files: &[PathBuf], ontology: Option<&Path>, lint: bool) -> Outcome {
        let mut groups: Vec<KnowledgeBase> = Vec::new();
        let base = ontology.map(|o| self.load_ontology(o)).transpose()?;
        let mut diags = Vec::new();
        for f in files {
            let bind = groups.last().map(|k| k.ontology.clone()).or_else(|| base.clone());
            let loaded = match self.load(f, bind) {
                Ok(k) => k,
                Err(Failure::Diagnostics(d)) => {
                    diags.extend(d);
                    continue;
                }
                Err(e) => return Err(e),
            };
            match groups.last_mut() {
                Some(k) if !loaded.collections.is_empty() => k.collections.extend(loaded.collections),
                _ => groups.push(loaded),
            }
        }
        for kb in &groups {
            diags.extend(checker::check_all(kb, self.check_options(lint)));
        }
        Ok(diags)
    }

    fn compile(&mut self, ontology: &Path, out: &Output) -> Outcome {
        let ont = self.load_ontology(ontology)?;
        let compiled = compile_dtd(&ont).map_err(Error::from)?;
        self.emit(out, &compiled.render())?;
        Ok(compiled.inherited_diagnostics(&ont))
    }

    fn specific(&mut self, ontology: &Path, collection: &Path, out: &Output) -> Outcome {
        let ont = self.load_ontology(ontology)?;
        let kb = self.load(collection, Some(ont))?;
        let coll = kb
            .collections
            .first()
            .ok_or_else(|| Failure::Fatal(format!("{}: not a collection", collection.display())))?;
        let text = styles::to_specific(coll, &kb.ontology)?;
        self.emit(out, &text)?;
        Ok(Vec::new())
    }

    fn generic(&mut self, ontology: &Path, document: &Path, out: &Output) -> Outcome {
        let ont = self.load_ontology(ontology)?;
        let text = self.read(document)?;
        let mut coll = styles::to_generic(
            &text,
            &ont,
            &document.display().to_string(),
            self.load_options().parse_options(),
        )?;
        if coll.ontology.is_none() {
            coll.ontology = ontology.file_name().map(|n| n.to_string_lossy().into_owned());
        }
        self.emit(out, &serialize_collection(&coll, &ont))?;
        Ok(Vec::new())
    }

    fn validate(&mut self, dtd_path: &Path, document: &Path) -> Outcome {
        let d = dtd::parse_dtd(&self.read(dtd_path)?, &dtd_path.display().to_string())?;
        let text = self.read(document)?;
        Ok(dtd::validate(&d, &text, &document.display().to_string()))
    }

    /// Write an imported knowledge base: ontology to the output, collection
    /// to `collection` (which names the ontology output when it is a file).
    fn write_import(&mut self, kb: &KnowledgeBase, collection: Option<&Path>, out: &Output) -> Outcome {
        self.emit(out, &serialize_ontology(&kb.ontology))?;
        let mut diags = Vec::new();
        match (kb.collections.first(), collection) {
            (Some(c), Some(path)) => {
                let mut c = c.clone();
                c.ontology = out
                    .output
                    .as_ref()
                    .and_then(|p| p.file_name())
                    .map(|n| n.to_string_lossy().into_owned());
                self.write_file(path, &serialize_collection(&c, &kb.ontology))?;
            }
            (Some(c), None) if !c.is_empty() => diags.push(Diagnostic::new(
                Severity::Warning,
                oml_core::Code::MOD001,
                format!("{} instances not written; pass --collection FILE", c.len()),
            )),
            _ => {}
        }
        Ok(diags)
    }

    fn calc(&mut self, ontology: &Path, collection: Option<&Path>, exprs: &[String], lenient: bool) -> Outcome {
        let ont = self.load_ontology(ontology)?;
        let kb = match collection {
            Some(c) => self.load(c, Some(ont))?,
            None => KnowledgeBase::new(ont),
        };
        let tables = checker::analyze(&kb);
        let eval = Evaluator::new(&kb, &tables);
        let mode = if lenient {
            Composability::Lenient
        } else {
            Composability::Strict
        };
        let mut text = String::new();
        for src in exprs {
            let e = parse_expr(&kb.ontology, src).map_err(Error::from)?;
            let ty = type_expr(&kb.ontology, &e, mode).map_err(Error::from)?;
            text.push_str(&format!(
                "{} : {} -> {}\n",
                e.display(&kb.ontology),
                kb.ontology.qualified_name(ty.source),
                kb.ontology.qualified_name(ty.target)
            ));
            for (a, b) in eval.extension(&e) {
                text.push_str(&format!("  {} {}\n", a.name(&kb), b.name(&kb)));
            }
        }
        self.emit(&Output { output: None }, &text)?;
        Ok(Vec::new())
    }

    fn run(&mut self, command: &Command) -> Outcome {
        match command {
            Command::Parse { file, ontology, out } => self.parse(file, ontology.as_deref(), out),
            Command::Check { files, ontology, lint } => self.check(files, ontology.as_deref(), *lint),
            Command::CompileDtd { ontology, out } => self.compile(ontology, out),
            Command::ToSpecific { ontology, collection, out } => self.specific(ontology, collection, out),
            Command::ToGeneric { ontology, document, out } => self.generic(ontology, document, out),
            Command::ValidateDtd { dtd, document } => self.validate(dtd, document),
            Command::ExportRdf { files, out } => {
                let kb = self.load_kb(files)?;
                let doc = rdf::export_rdfs(&kb)?;
                self.emit(out, &doc.to_string())?;
                Ok(Vec::new())
            }
            Command::ImportRdf {
                file,
                name,
                collection,
                out,
            } => {
                let doc_name = file.display().to_string();
                let (doc, mut diags) = rdf::parse_triples(&self.read(file)?, &doc_name);
                let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned());
                let name = name.clone().or(stem).unwrap_or_else(|| "imported".into());
                let imported = rdf::import_rdfs(&doc, &name, &doc_name);
                diags.extend(imported.diagnostics);
                diags.extend(self.write_import(&imported.kb, collection.as_deref(), out)?);
                Ok(diags)
            }
            Command::ExportXol { files, extended, out } => {
                let kb = self.load_kb(files)?;
                let text = xol::export_xol(&kb, xol::XolOptions { extended: *extended })?;
                self.emit(out, &text)?;
                Ok(Vec::new())
            }
            Command::ImportXol {
                file,
                hint,
                collection,
                out,
            } => {
                let hint = hint.as_deref().map(|h| self.load_ontology(h)).transpose()?;
                let kb = xol::import_xol(&self.read(file)?, &file.display().to_string(), hint.as_ref())?;
                self.write_import(&kb, collection.as_deref(), out)
            }
            Command::Lint { ontology, collection } => {
                let ont = self.load_ontology(ontology)?;
                let kb = self.load(collection, Some(ont))?;
                let tables = checker::analyze(&kb);
                Ok(checker::lint_inclusion_implies_subtype(&kb, &tables))
            }
            Command::Calc {
                ontology,
                collection,
                exprs,
                subtype_composable,
            } => self.calc(ontology, collection.as_deref(), exprs, *subtype_composable),
        }
    }
}

fn json_diagnostics(diags: &[Diagnostic]) -> String {
    let items: Vec<serde_json::Value> = diags
        .iter()
        .map(|d| {
            serde_json::json!({
                "severity": d.severity.as_str(),
                "code": d.code.as_str(),
                "message": d.message,
                "location": d.location.as_ref().map(|l| serde_json::json!({
                    "document": l.document,
                    "line": l.line,
                    "column": l.column,
                })),
            })
        })
        .collect();
    let doc = serde_json::json!({ "diagnostics": items });
    format!("{doc:#}\n")
}

fn report(err: &mut dyn Write, format: Format, diags: &mut [Diagnostic]) {
    diagnostic::sort(diags);
    let text = match format {
        Format::Json => json_diagnostics(diags),
        Format::Text => diags.iter().map(|d| format!("{d}\n")).collect(),
    };
    let _ = err.write_all(text.as_bytes());
}

/// Run the command line `args` (program name first), writing artifacts to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let strict = cli.global.strict || (!cli.global.lenient && strict_by_default());
    let mut ctx = Context {
        global: &cli.global,
        strict,
        out,
    };
    match ctx.run(&cli.command) {
        Ok(mut diags) | Err(Failure::Diagnostics(mut diags)) => {
            let failed = diags.iter().any(|d| d.severity == Severity::Error);
            report(err, cli.global.format, &mut diags);
            i32::from(failed)
        }
        Err(Failure::Fatal(message)) => {
            let _ = writeln!(err, "oml: {message}");
            2
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
