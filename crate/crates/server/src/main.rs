use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use bwqa::dialogue::Session;
use bwqa::scene::{load_scene, Scene};
use bwqa::service::{bundled_scene, run_batch_eval, SessionStore, BUNDLED_CORPUS, DATA_DIR_ENV};
use bwqa::spatial::Constants;
use bwqa::ulf::Grammar;
use bwqa_server::{router, AppState};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bwqa", about = "Spatial question answering over a blocks world", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP/WebSocket service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Grammar document (defaults to the bundled one).
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Constants table (defaults to the built-in values).
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Scene new sessions start from.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Transcript directory; sessions found there are reloaded.
        #[arg(long, env = DATA_DIR_ENV)]
        data_dir: Option<PathBuf>,
    },
    /// Chat on the terminal. `:move LABEL X Y` moves a block, `:scene`
    /// prints the scene, `:quit` leaves.
    Repl {
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Print the logical form and frame under each answer.
        #[arg(long)]
        debug: bool,
    },
    /// Run an annotated corpus and print the evaluation tables.
    Eval {
        /// Corpus file (defaults to the bundled corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Also write the full report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        grammar: Option<PathBuf>,
        #[arg(long)]
        constants: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn grammar(path: Option<&Path>) -> Result<Arc<Grammar>> {
    Ok(Arc::new(match path {
        Some(p) => Grammar::from_json(&read(p)?).with_context(|| format!("loading grammar {}", p.display()))?,
        None => Grammar::bundled().clone(),
    }))
}

fn constants(path: Option<&Path>) -> Result<Arc<Constants>> {
    Ok(Arc::new(match path {
        Some(p) => Constants::from_json(&read(p)?).with_context(|| format!("loading constants {}", p.display()))?,
        None => Constants::default(),
    }))
}

fn scene(path: Option<&Path>) -> Result<Scene> {
    match path {
        Some(p) => load_scene(&read(p)?).with_context(|| format!("loading scene {}", p.display())),
        None => Ok(bundled_scene()),
    }
}

async fn serve(host: &str, port: u16, store: SessionStore) -> Result<()> {
    let restored = store.load_persisted().context("reloading persisted sessions")?;
    if restored > 0 {
        eprintln!("restored {restored} sessions");
    }
    let app = router(AppState::new(store));
    let listener = tokio::net::TcpListener::bind((host, port)).await.with_context(|| format!("binding {host}:{port}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}

fn repl(mut session: Session, debug: bool) -> Result<()> {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    writeln!(out, "{}", session.step("").text())?;
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        if line == ":quit" {
            break;
        }
        if line == ":scene" {
            writeln!(out, "{}", session.scene().to_json())?;
            continue;
        }
        if let Some(rest) = line.strip_prefix(":move ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [label @ .., x, y] = parts.as_slice() else {
                writeln!(out, "usage: :move LABEL X Y")?;
                continue;
            };
            let (Ok(x), Ok(y)) = (x.parse::<f64>(), y.parse::<f64>()) else {
                writeln!(out, "usage: :move LABEL X Y")?;
                continue;
            };
            let label = label.join(" ");
            let moved = session
                .scene()
                .find_block(&label)
                .map(|b| b.label.clone())
                .ok_or_else(|| format!("no block called {label}"))
                .and_then(|l| session.scene().drop_block(&l, x, y).map_err(|e| format!("{}: {e}", e.code())));
            match moved {
                Ok(next) => {
                    session.set_scene(next);
                    writeln!(out, "moved")?;
                }
                Err(e) => writeln!(out, "{e}")?,
            }
            continue;
        }
        let turn = session.step(line);
        writeln!(out, "{}", turn.text())?;
        if debug {
            if let Some(u) = &turn.ulf {
                writeln!(out, "  ulf: {u}")?;
            }
            if let Some(f) = &turn.frame {
                writeln!(out, "{}", f.lines().map(|l| format!("  {l}")).collect::<Vec<_>>().join("\n"))?;
            }
        }
        if turn.ended {
            break;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Serve { port, host, grammar: g, constants: k, scene: s, data_dir } => {
            let store = SessionStore::new(grammar(g.as_deref())?, constants(k.as_deref())?, scene(s.as_deref())?, data_dir);
            tokio::runtime::Runtime::new()?.block_on(serve(&host, port, store))
        }
        Command::Repl { scene: s, grammar: g, constants: k, debug } => {
            let session = Session::new(grammar(g.as_deref())?, constants(k.as_deref())?, scene(s.as_deref())?);
            repl(session, debug)
        }
        Command::Eval { corpus, scene: s, report, grammar: g, constants: k } => {
            let text = match &corpus {
                Some(p) => read(p)?,
                None => BUNDLED_CORPUS.to_string(),
            };
            let r = run_batch_eval(&text, &scene(s.as_deref())?, grammar(g.as_deref())?, constants(k.as_deref())?);
            print!("{}", r.render());
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&r)?;
                std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
            }
            if r.total == 0 && !r.line_errors.is_empty() {
                bail!("no usable corpus lines");
            }
            Ok(())
        }
    }
}
