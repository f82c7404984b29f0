use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{AngleExpr, Circuit, Gate, GateKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QasmError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("line {line}: qubit index {index} out of range for {num_qubits} qubits")]
    QubitIndexOutOfRange { line: usize, index: usize, num_qubits: usize },
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "measure", "reset", "barrier", "if", "else", "for", "while", "gate", "def", "defcal", "include",
    "bit", "creg", "qreg", "let", "const", "output", "ctrl", "negctrl", "inv", "pow", "box", "delay",
    "pi", "π", "return", "break", "continue", "end", "opaque",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn syntax(line: usize, message: impl Into<String>) -> QasmError {
    QasmError::SyntaxError {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut tokens = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let src = raw.split("//").next().unwrap_or("");
        let chars: Vec<char> = src.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                });
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j], '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                tokens.push(Token {
                    tok: Tok::Number(chars[start..i].iter().collect()),
                    line,
                });
            } else if c == '"' {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(syntax(line, "unterminated string"));
                }
                tokens.push(Token {
                    tok: Tok::Str(chars[start..i].iter().collect()),
                    line,
                });
                i += 1;
            } else if "[](),;*-+/=<>!&|^%{}:@".contains(c) {
                tokens.push(Token { tok: Tok::Punct(c), line });
                i += 1;
            } else {
                return Err(syntax(line, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(tokens)
}

/// Cursor over the tokens of one statement.
struct Stmt<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
}

impl<'a> Stmt<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        if let Some(t) = t {
            self.line = t.line;
            self.pos += 1;
        }
        t.map(|t| &t.tok)
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QasmError> {
        match self.next() {
            Some(Tok::Punct(p)) if *p == c => Ok(()),
            other => Err(syntax(self.line, format!("expected `{c}`, found {}", describe(other)))),
        }
    }

    fn expect_ident(&mut self) -> Result<&'a str, QasmError> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(syntax(self.line, format!("expected a name, found {}", describe(other)))),
        }
    }

    fn expect_index(&mut self) -> Result<usize, QasmError> {
        match self.next() {
            Some(Tok::Number(n)) => n
                .parse()
                .map_err(|_| syntax(self.line, format!("`{n}` is not a non-negative integer"))),
            other => Err(syntax(self.line, format!("expected an index, found {}", describe(other)))),
        }
    }

    fn finish(&self) -> Result<(), QasmError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(syntax(t.line, format!("unexpected {}", describe(Some(&t.tok))))),
        }
    }

    /// Optional sign followed by a number literal.
    fn number(&mut self) -> Result<f64, QasmError> {
        let negative = matches!(self.peek(), Some(Tok::Punct('-')));
        if negative {
            self.next();
        }
        match self.next() {
            Some(Tok::Number(n)) => n
                .parse::<f64>()
                .map(|v| if negative { -v } else { v })
                .map_err(|_| syntax(self.line, format!("malformed number `{n}`"))),
            other => Err(syntax(self.line, format!("expected a number, found {}", describe(other)))),
        }
    }
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of statement".into(),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(Tok::Number(n)) => format!("`{n}`"),
        Some(Tok::Str(s)) => format!("\"{s}\""),
        Some(Tok::Punct(c)) => format!("`{c}`"),
    }
}

fn gate_kind(name: &str) -> Option<GateKind> {
    Some(match name {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "rx" => GateKind::Rx,
        "ry" => GateKind::Ry,
        "rz" => GateKind::Rz,
        "cx" => GateKind::Cx,
        "cz" => GateKind::Cz,
        _ => return None,
    })
}

fn parse_angle(stmt: &mut Stmt<'_>, inputs: &BTreeSet<String>) -> Result<AngleExpr, QasmError> {
    let symbol = |stmt: &Stmt<'_>, name: &str| {
        if inputs.contains(name) {
            Ok(name.to_string())
        } else {
            Err(syntax(stmt.line, format!("undeclared parameter `{name}`")))
        }
    };
    let angle = match stmt.peek() {
        Some(Tok::Ident(name)) => {
            stmt.next();
            let name = symbol(stmt, name)?;
            if matches!(stmt.peek(), Some(Tok::Punct('*'))) {
                stmt.next();
                AngleExpr::Scaled {
                    factor: stmt.number()?,
                    symbol: name,
                }
            } else {
                AngleExpr::Symbol(name)
            }
        }
        _ => {
            let value = stmt.number()?;
            if matches!(stmt.peek(), Some(Tok::Punct('*'))) {
                stmt.next();
                let name = stmt.expect_ident()?;
                AngleExpr::scaled(value, symbol(stmt, name)?)
            } else {
                AngleExpr::Literal(value)
            }
        }
    };
    match stmt.peek() {
        Some(Tok::Punct(')')) => Ok(angle),
        Some(Tok::Punct(op @ ('+' | '-' | '/' | '*' | '^' | '%'))) => {
            Err(QasmError::UnsupportedFeature(format!("operator `{op}`")))
        }
        other => Err(syntax(stmt.line, format!("expected `)`, found {}", describe(other)))),
    }
}

/// Parses the restricted OpenQASM 3 mixer subset.
///
/// Accepted: optional `OPENQASM 3;`, `input float <name>;` (or
/// `input float[64]`), exactly one `qubit[N] q;`, then `h`, `x`,
/// `rx|ry|rz(<expr>)` and `cx|cz` statements on indexed qubits. Angles are a
/// number, a name, or a number times a name. `//` starts a comment.
pub fn parse_qasm3_mixer(text: &str) -> Result<Circuit, QasmError> {
    let tokens = tokenize(text)?;
    let mut statements: Vec<&[Token]> = Vec::new();
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.tok == Tok::Punct(';') {
            statements.push(&tokens[start..i]);
            start = i + 1;
        }
    }
    if let Some(t) = tokens.get(start) {
        return Err(syntax(t.line, "missing `;`"));
    }

    let mut inputs = BTreeSet::new();
    let mut num_qubits: Option<usize> = None;
    let mut gates = Vec::new();
    for (k, toks) in statements.into_iter().enumerate() {
        let Some(first) = toks.first() else {
            continue;
        };
        if let Some(Tok::Ident(kw)) = toks
            .iter()
            .map(|t| &t.tok)
            .find(|t| matches!(t, Tok::Ident(s) if UNSUPPORTED_KEYWORDS.contains(&s.as_str())))
        {
            return Err(QasmError::UnsupportedFeature(kw.clone()));
        }
        let mut stmt = Stmt {
            toks,
            pos: 0,
            line: first.line,
        };
        let head = match &first.tok {
            Tok::Ident(s) => s.as_str(),
            other => return Err(syntax(first.line, format!("unexpected {}", describe(Some(other))))),
        };
        stmt.next();
        match head {
            "OPENQASM" => {
                if k != 0 {
                    return Err(syntax(first.line, "`OPENQASM` must be the first statement"));
                }
                match stmt.next() {
                    Some(Tok::Number(v)) if v == "3" || v == "3.0" => {}
                    Some(Tok::Number(v)) => return Err(QasmError::UnsupportedFeature(format!("OPENQASM {v}"))),
                    other => return Err(syntax(stmt.line, format!("expected a version, found {}", describe(other)))),
                }
                stmt.finish()?;
            }
            "input" => {
                let ty = stmt.expect_ident()?;
                if ty != "float" {
                    return Err(QasmError::UnsupportedFeature(format!("input {ty}")));
                }
                if matches!(stmt.peek(), Some(Tok::Punct('['))) {
                    stmt.next();
                    let width = stmt.expect_index()?;
                    if width != 64 {
                        return Err(QasmError::UnsupportedFeature(format!("float[{width}]")));
                    }
                    stmt.expect_punct(']')?;
                }
                let name = stmt.expect_ident()?;
                stmt.finish()?;
                if num_qubits.is_some() {
                    return Err(syntax(stmt.line, "inputs must precede the qubit declaration"));
                }
                if !inputs.insert(name.to_string()) {
                    return Err(syntax(stmt.line, format!("parameter `{name}` declared twice")));
                }
            }
            "qubit" => {
                stmt.expect_punct('[')?;
                let n = stmt.expect_index()?;
                stmt.expect_punct(']')?;
                let name = stmt.expect_ident()?;
                stmt.finish()?;
                if name != "q" {
                    return Err(syntax(stmt.line, format!("qubit register must be named `q`, found `{name}`")));
                }
                if num_qubits.replace(n).is_some() {
                    return Err(syntax(stmt.line, "qubit register declared twice"));
                }
            }
            name => {
                let kind = gate_kind(name).ok_or_else(|| QasmError::UnsupportedFeature(name.to_string()))?;
                let n = num_qubits.ok_or_else(|| syntax(first.line, "gate before the qubit declaration"))?;
                let angle = if kind.is_rotation() {
                    stmt.expect_punct('(')?;
                    let a = parse_angle(&mut stmt, &inputs)?;
                    stmt.expect_punct(')')?;
                    Some(a)
                } else {
                    None
                };
                let mut qubits = Vec::new();
                loop {
                    let reg = stmt.expect_ident()?;
                    if reg != "q" {
                        return Err(syntax(stmt.line, format!("unknown register `{reg}`")));
                    }
                    if !matches!(stmt.peek(), Some(Tok::Punct('['))) {
                        return Err(QasmError::UnsupportedFeature("register broadcast".into()));
                    }
                    stmt.next();
                    let index = stmt.expect_index()?;
                    stmt.expect_punct(']')?;
                    if index >= n {
                        return Err(QasmError::QubitIndexOutOfRange {
                            line: stmt.line,
                            index,
                            num_qubits: n,
                        });
                    }
                    qubits.push(index);
                    if !matches!(stmt.peek(), Some(Tok::Punct(','))) {
                        break;
                    }
                    stmt.next();
                }
                stmt.finish()?;
                gates.push(Gate::new(kind, qubits, angle).map_err(|e| syntax(stmt.line, e.to_string()))?);
            }
        }
    }
    let n = num_qubits.ok_or_else(|| syntax(text.lines().count().max(1), "missing `qubit[N] q;` declaration"))?;
    Circuit::new(n, gates).map_err(|e| syntax(0, e.to_string()))
}

/// Serializes a circuit in the subset accepted by [`parse_qasm3_mixer`].
pub fn render_qasm3(circuit: &Circuit) -> Result<String, QasmError> {
    let mut out = String::from("OPENQASM 3;\n");
    for p in circuit.parameters() {
        let _ = writeln!(out, "input float {p};");
    }
    let _ = writeln!(out, "qubit[{}] q;", circuit.num_qubits());
    for g in circuit.gates() {
        if gate_kind(g.kind.name()).is_none() {
            return Err(QasmError::UnsupportedFeature(g.kind.name().to_string()));
        }
        out.push_str(g.kind.name());
        if let Some(a) = &g.angle {
            let _ = write!(out, "({a})");
        }
        let qs: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(out, " {};", qs.join(", "));
    }
    Ok(out)
}
