//! JSON-lines session server.
//!
//! Each request line is `{"session": id, "action": "<add>...</add>"}`, with
//! an optional opaque `"think"` text. The first request of a session must
//! carry a `<build>` action. `{"session": id, "history": true}` returns the
//! session's compressed history instead of stepping it. Every request gets
//! exactly one response line: the feedback object with the session id
//! in front.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use geoproof_core::dsl::parse_action;
use geoproof_core::engine::{start_session, Checkpoint, Detail, EngineError, Feedback, SessionConfig, SessionState, Status};
use geoproof_core::memory::{compress, pass_check, CompressedHistory, PassCheckLimits, Turn, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone)]
pub struct ServerOptions {
    pub seed: u64,
    pub session: SessionConfig,
    /// Gate every action through the pass check before it reaches the engine.
    pub passcheck: Option<PassCheckLimits>,
    /// Directory of per-session checkpoint files, written after every step
    /// and read back when an unknown session id arrives.
    pub checkpoint_dir: Option<PathBuf>,
    /// Keep reading after every open session is over.
    pub keep_open: bool,
}

#[derive(Debug, Deserialize)]
struct Request {
    session: Value,
    #[serde(default)]
    action: Option<String>,
    #[serde(default)]
    think: Option<String>,
    #[serde(default)]
    history: bool,
}

#[derive(Serialize)]
struct Response<'a> {
    session: Option<&'a str>,
    #[serde(flatten)]
    feedback: &'a Feedback,
}

#[derive(Serialize)]
struct HistoryResponse<'a> {
    session: &'a str,
    history: Option<CompressedHistory>,
}

struct Entry {
    state: SessionState,
    history: Vec<Turn>,
    /// A request was refused for the turn limit.
    out_of_turns: bool,
}

pub struct Server {
    opts: ServerOptions,
    sessions: BTreeMap<String, Entry>,
}

fn error_feedback(turn: u32, known: Vec<String>, message: String) -> Feedback {
    Feedback { turn, status: Status::Error, detail: Detail { error: Some(message), ..Detail::default() }, known }
}

fn session_id(v: &Value) -> Option<String> {
    match v {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl Server {
    pub fn new(opts: ServerOptions) -> Server {
        Server { opts, sessions: BTreeMap::new() }
    }

    /// Answers one request line with one response line (no newline).
    pub fn handle(&mut self, line: &str) -> String {
        let req: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return render(None, &error_feedback(0, Vec::new(), format!("invalid request: {e}"))),
        };
        let Some(id) = session_id(&req.session) else {
            return render(None, &error_feedback(0, Vec::new(), "invalid request: missing session id".into()));
        };
        if req.history {
            let history = self.sessions.get(&id).and_then(|e| compress(&e.history));
            return serde_json::to_string(&HistoryResponse { session: &id, history }).expect("serializable");
        }
        let Some(action) = req.action else {
            return render(Some(&id), &error_feedback(0, Vec::new(), "invalid request: missing action".into()));
        };
        let think = req.think.unwrap_or_default();
        let fb = self.step(&id, &think, &action);
        render(Some(&id), &fb)
    }

    fn checkpoint_path(&self, id: &str) -> Option<PathBuf> {
        let dir = self.opts.checkpoint_dir.as_ref()?;
        id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-').then(|| dir.join(format!("{id}.json")))
    }

    fn resume(&mut self, id: &str) -> Result<bool, String> {
        let Some(path) = self.checkpoint_path(id) else { return Ok(false) };
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(false),
            Err(e) => return Err(format!("{}: {e}", path.display())),
        };
        let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let state = SessionState::resume(&cp, &self.opts.session).map_err(|e| e.to_string())?;
        self.sessions.insert(id.to_string(), Entry { state, history: Vec::new(), out_of_turns: false });
        Ok(true)
    }

    fn save(&self, id: &str) -> Result<(), String> {
        let (Some(path), Some(e)) = (self.checkpoint_path(id), self.sessions.get(id)) else { return Ok(()) };
        let text = serde_json::to_string_pretty(&e.state.checkpoint()).expect("serializable");
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, &path)).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn step(&mut self, id: &str, think: &str, action: &str) -> Feedback {
        if !self.sessions.contains_key(id) {
            match self.resume(id) {
                Ok(true) => {}
                Ok(false) => return self.start(id, think, action),
                Err(e) => return error_feedback(0, Vec::new(), format!("cannot resume session: {e}")),
            }
        }
        let entry = self.sessions.get_mut(id).expect("session exists");
        if let Some(limits) = &self.opts.passcheck {
            if let Verdict::Reject(reason) = pass_check(think, action, &entry.history, limits) {
                let name = serde_json::to_value(reason).expect("serializable");
                let reason = name.as_str().unwrap_or_default();
                return error_feedback(entry.state.turn, entry.state.known(), format!("rejected by pass check: {reason}"));
            }
        }
        let fb = match entry.state.step_text(action) {
            Ok(fb) => fb,
            Err(e) => {
                entry.out_of_turns |= matches!(e, EngineError::TurnLimitExceeded(_));
                return error_feedback(entry.state.turn, entry.state.known(), e.to_string());
            }
        };
        entry.history.push(Turn { think: think.to_string(), action: action.to_string(), feedback: fb.clone() });
        match self.save(id) {
            Ok(()) => fb,
            Err(e) => error_feedback(fb.turn, fb.known, format!("checkpoint not written: {e}")),
        }
    }

    fn start(&mut self, id: &str, think: &str, action: &str) -> Feedback {
        let a = match parse_action(action) {
            Ok(a) => a,
            Err(e) => return error_feedback(0, Vec::new(), e.to_string()),
        };
        match start_session(&a, self.opts.seed, &self.opts.session) {
            Ok((state, fb)) => {
                let turn = Turn { think: think.to_string(), action: action.to_string(), feedback: fb.clone() };
                self.sessions.insert(id.to_string(), Entry { state, history: vec![turn], out_of_turns: false });
                match self.save(id) {
                    Ok(()) => fb,
                    Err(e) => error_feedback(fb.turn, fb.known, format!("checkpoint not written: {e}")),
                }
            }
            Err(e) => error_feedback(0, Vec::new(), e.to_string()),
        }
    }

    /// True once at least one session exists and every session is solved
    /// or has been refused for the turn limit.
    pub fn all_finished(&self) -> bool {
        !self.sessions.is_empty() && self.sessions.values().all(|e| e.state.is_solved() || e.out_of_turns)
    }
}

fn render(id: Option<&str>, fb: &Feedback) -> String {
    serde_json::to_string(&Response { session: id, feedback: fb }).expect("serializable")
}

/// Serves requests from `input` until end of input or, unless
/// `keep_open` is set, until every session is over.
pub fn serve(input: &mut dyn BufRead, output: &mut dyn Write, opts: ServerOptions) -> std::io::Result<()> {
    let mut server = Server::new(opts);
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        if line.trim().is_empty() {
            continue;
        }
        let resp = server.handle(line.trim_end_matches(['\n', '\r']));
        output.write_all(resp.as_bytes())?;
        output.write_all(b"\n")?;
        output.flush()?;
        if !server.opts.keep_open && server.all_finished() {
            return Ok(());
        }
    }
}
