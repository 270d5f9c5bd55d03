//! Concrete syntax.
//!
//! ```text
//! term  := par
//! par   := unary ("|" unary)*
//! unary := "new" ids "." unary | "\" "(" ids ")" "." unary | "tau" "." unary
//!        | "!" prefix ["." unary] | prefix ["." unary] | app
//! prefix:= name "(" ID ")" | name "!" ["<" term ">"] | name
//! app   := atom ("<" args ">")*
//! atom  := "0" | ID | "(" term ")"
//! ```
//!
//! Lowercase identifiers are names, uppercase ones are process variables (or
//! references to earlier definitions). A bare `a` is `a(X).0` and `a!` sends
//! the inert abstraction.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, ParseError};
use crate::sort::sort_check;
use crate::syntax::{
    dummy_abstraction, free_vars, fresh_with, symbols, Arg, CalcId, Name, Param, Sym, Term,
    VarRef, RESERVED_PREFIX,
};
use crate::transforms::{encode_replication, encode_tau, Prefix};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str, allow_reserved: bool) -> Result<(Vec<Token>, (usize, usize)), ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == RESERVED_PREFIX {
            if c == RESERVED_PREFIX && !allow_reserved {
                return Err(ParseError {
                    line,
                    col,
                    expected: format!("an identifier not starting with `{RESERVED_PREFIX}`"),
                });
            }
            let mut s = String::from(c);
            i += 1;
            col += 1;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: start.0,
                col: start.1,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Num(s),
                line: start.0,
                col: start.1,
            });
            continue;
        }
        if "().|!<>,\\[]=;".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line,
                col,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            line,
            col,
            expected: "a term".into(),
        });
    }
    Ok((out, (line, col)))
}

fn is_upper(s: &str) -> bool {
    Sym::new(s).looks_like_proc_var()
}

/// Parsed definitions, in file order.
#[derive(Clone, Debug, Default)]
pub struct DefEnv {
    defs: BTreeMap<String, Def>,
    order: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Def {
    pub calc: CalcId,
    pub term: Term,
    pub line: usize,
    pub col: usize,
}

impl DefEnv {
    pub fn get(&self, name: &str) -> Option<&Def> {
        self.defs.get(name)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Def)> {
        self.order.iter().map(|n| (n.as_str(), &self.defs[n]))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions<'a> {
    pub calc: CalcId,
    /// Accept identifiers from the `#` namespace (for re-reading printed
    /// normal forms).
    pub allow_reserved: bool,
    pub defs: Option<&'a DefEnv>,
}

impl ParseOptions<'_> {
    pub fn new(calc: CalcId) -> Self {
        ParseOptions {
            calc,
            allow_reserved: false,
            defs: None,
        }
    }
}

/// Parses and sort-checks a term.
pub fn parse_term(src: &str, calc: CalcId) -> Result<Term, Error> {
    parse_term_with(src, &ParseOptions::new(calc))
}

pub fn parse_term_with(src: &str, opts: &ParseOptions<'_>) -> Result<Term, Error> {
    let (toks, end) = lex(src, opts.allow_reserved)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        opts,
        name_vars: Vec::new(),
        proc_vars: Vec::new(),
    };
    let t = p.term()?;
    if p.pos < p.toks.len() {
        return Err(p.err("end of input or `|`").into());
    }
    sort_check(&t, opts.calc)?;
    Ok(t)
}

/// Reads `def NAME [calc] = term ;` entries. Bodies may refer to earlier
/// definitions and must be closed.
pub fn load_defs(path: impl AsRef<Path>) -> Result<DefEnv, Error> {
    let src = std::fs::read_to_string(path)?;
    parse_defs(&src)
}

pub fn parse_defs(src: &str) -> Result<DefEnv, Error> {
    let (toks, end) = lex(src, false)?;
    let mut env = DefEnv::default();
    let mut pos = 0;
    while pos < toks.len() {
        let (line, col) = (toks[pos].line, toks[pos].col);
        if toks[pos].tok != Tok::Ident("def".into()) {
            return Err(err_at(&toks, pos, end, "`def`").into());
        }
        pos += 1;
        let name = match toks.get(pos).map(|t| &t.tok) {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return Err(err_at(&toks, pos, end, "definition name").into()),
        };
        pos += 1;
        if toks.get(pos).map(|t| &t.tok) != Some(&Tok::Sym('[')) {
            return Err(err_at(&toks, pos, end, "`[`").into());
        }
        pos += 1;
        let mut spec = String::new();
        while let Some(t) = toks.get(pos) {
            match &t.tok {
                Tok::Sym(']') => break,
                Tok::Ident(s) | Tok::Num(s) => spec.push_str(s),
                _ => return Err(err_at(&toks, pos, end, "calculus").into()),
            }
            pos += 1;
        }
        let calc = CalcId::from_str(&spec).map_err(|_| err_at(&toks, pos, end, "calculus such as pi, piD1 or pid1"))?;
        pos += 1;
        if toks.get(pos).map(|t| &t.tok) != Some(&Tok::Sym('=')) {
            return Err(err_at(&toks, pos, end, "`=`").into());
        }
        pos += 1;
        let opts = ParseOptions {
            calc,
            allow_reserved: false,
            defs: Some(&env),
        };
        let mut p = Parser {
            toks: toks.clone(),
            pos,
            end,
            opts: &opts,
            name_vars: Vec::new(),
            proc_vars: Vec::new(),
        };
        let term = p.term()?;
        if p.toks.get(p.pos).map(|t| &t.tok) != Some(&Tok::Sym(';')) {
            return Err(p.err("`;`").into());
        }
        pos = p.pos + 1;
        sort_check(&term, calc)?;
        let fv = free_vars(&term);
        if !fv.is_empty() {
            let vars: Vec<&str> = fv
                .iter()
                .map(|v| match v {
                    VarRef::Proc(s) | VarRef::Name(s) => s.as_str(),
                })
                .collect();
            return Err(Error::OpenTerm {
                name,
                vars: vars.join(", "),
            });
        }
        if env.defs.contains_key(&name) {
            return Err(Error::DuplicateDef(name));
        }
        env.order.push(name.clone());
        env.defs.insert(
            name,
            Def {
                calc,
                term,
                line,
                col,
            },
        );
    }
    Ok(env)
}

struct Parser<'o, 'd> {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    opts: &'o ParseOptions<'d>,
    name_vars: Vec<Sym>,
    proc_vars: Vec<Sym>,
}

fn err_at(toks: &[Token], pos: usize, end: (usize, usize), expected: &str) -> ParseError {
    let (line, col) = toks.get(pos).map(|t| (t.line, t.col)).unwrap_or(end);
    ParseError {
        line,
        col,
        expected: expected.into(),
    }
}

impl Parser<'_, '_> {
    fn err(&self, expected: &str) -> ParseError {
        err_at(&self.toks, self.pos, self.end, expected)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("identifier")),
        }
    }

    fn name(&self, s: &str) -> Name {
        let sym = Sym::new(s);
        if self.name_vars.contains(&sym) {
            Name::Var(sym)
        } else {
            Name::Const(sym)
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut items = vec![self.unary()?];
        while self.eat('|') {
            items.push(self.unary()?);
        }
        let mut it = items.into_iter().rev();
        let last = it.next().expect("one item");
        Ok(it.fold(last, |acc, t| Term::par(t, acc)))
    }

    /// Parses `"." unary` if present, else `0`.
    fn continuation(&mut self) -> Result<Term, ParseError> {
        if self.eat('.') {
            self.unary()
        } else {
            Ok(Term::Nil)
        }
    }

    fn with_binder<T>(
        &mut self,
        p: &Param,
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        match p {
            Param::Proc(s) => self.proc_vars.push(s.clone()),
            Param::Name(s) => self.name_vars.push(s.clone()),
        }
        let r = f(self);
        match p {
            Param::Proc(_) => self.proc_vars.pop(),
            Param::Name(_) => self.name_vars.pop(),
        };
        r
    }

    fn param(&mut self) -> Result<Param, ParseError> {
        let s = self.ident()?;
        Ok(if is_upper(&s) {
            Param::Proc(Sym::new(&s))
        } else {
            Param::Name(Sym::new(&s))
        })
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(k)) if k == "new" => {
                self.pos += 1;
                let mut names = vec![self.ident()?];
                while self.eat(',') {
                    names.push(self.ident()?);
                }
                self.expect('.')?;
                // a restricted name shadows an enclosing name variable
                let saved = self.name_vars.clone();
                self.name_vars.retain(|v| !names.iter().any(|n| n == v.as_str()));
                let body = self.unary();
                self.name_vars = saved;
                let body = body?;
                Ok(names
                    .iter()
                    .rev()
                    .fold(body, |acc, n| Term::res(n, acc)))
            }
            Some(Tok::Ident(k)) if k == "tau" => {
                self.pos += 1;
                self.expect('.')?;
                let body = self.unary()?;
                Ok(encode_tau(&body, self.opts.calc))
            }
            Some(Tok::Sym('\\')) => {
                self.pos += 1;
                self.expect('(')?;
                let mut ps = vec![self.param()?];
                while self.eat(',') {
                    ps.push(self.param()?);
                }
                self.expect(')')?;
                self.expect('.')?;
                let (np, nn) = (self.proc_vars.len(), self.name_vars.len());
                for p in &ps {
                    match p {
                        Param::Proc(s) => self.proc_vars.push(s.clone()),
                        Param::Name(s) => self.name_vars.push(s.clone()),
                    }
                }
                let body = self.unary();
                self.proc_vars.truncate(np);
                self.name_vars.truncate(nn);
                Ok(Term::abs(ps, body?))
            }
            Some(Tok::Sym('!')) => {
                self.pos += 1;
                let (prefix, body) = self.prefixed()?;
                Ok(encode_replication(&prefix, &body, self.opts.calc))
            }
            Some(Tok::Ident(s)) if !is_upper(&s) && !is_keyword(&s) => {
                let (prefix, body) = self.prefixed()?;
                Ok(match prefix {
                    Prefix::Input { subject, binder } => {
                        Term::Input(subject, binder, body.into())
                    }
                    Prefix::Output { subject, payload } => {
                        Term::Output(subject, payload.into(), body.into())
                    }
                })
            }
            _ => self.app(),
        }
    }

    /// A prefix and its continuation.
    fn prefixed(&mut self) -> Result<(Prefix, Term), ParseError> {
        let s = self.ident()?;
        if is_upper(&s) {
            self.pos -= 1;
            return Err(self.err("channel name"));
        }
        let subject = self.name(&s);
        if self.eat('(') {
            let binder = self.param()?;
            self.expect(')')?;
            let body = self.with_binder(&binder, |p| p.continuation())?;
            return Ok((Prefix::Input { subject, binder }, body));
        }
        if self.eat('!') {
            let payload = if self.eat('<') {
                let t = self.term()?;
                self.expect('>')?;
                t
            } else {
                dummy_abstraction(self.opts.calc)
            };
            let body = self.continuation()?;
            return Ok((Prefix::Output { subject, payload }, body));
        }
        let body = self.continuation()?;
        let binder = Param::Proc(fresh_with("X", &symbols(&body)));
        Ok((Prefix::Input { subject, binder }, body))
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.eat('<') {
            let mut args = Vec::new();
            if !self.eat('>') {
                loop {
                    args.push(self.arg()?);
                    if self.eat('>') {
                        break;
                    }
                    if !self.eat(',') {
                        return Err(self.err("`,` or `>`"));
                    }
                }
            }
            t = Term::app(t, args);
        }
        Ok(t)
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            let s = s.clone();
            let ends = matches!(self.peek_at(1), Some(Tok::Sym(',')) | Some(Tok::Sym('>')));
            if ends && !is_upper(&s) && !is_keyword(&s) {
                self.pos += 1;
                return Ok(Arg::Name(self.name(&s)));
            }
        }
        Ok(Arg::Term(self.term()?))
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) if n == "0" => {
                self.pos += 1;
                Ok(Term::Nil)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Some(Tok::Ident(s)) if is_upper(&s) => {
                self.pos += 1;
                let sym = Sym::new(&s);
                if !self.proc_vars.contains(&sym) {
                    if let Some(d) = self.opts.defs.and_then(|e| e.get(&s)) {
                        return Ok(d.term.clone());
                    }
                }
                Ok(Term::Var(sym))
            }
            _ => Err(self.err("a term")),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "new" | "tau" | "def")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq;

    #[test]
    fn abstraction_over_output() {
        let t = parse_term("\\(X). a!<X>.0", CalcId::PiD(1)).unwrap();
        let expected = Term::abs1("X", Term::output(Name::c("a"), Term::var("X"), Term::Nil));
        assert_eq!(t, expected);
    }

    #[test]
    fn name_abstraction_applied() {
        let t = parse_term("(\\(x). x!<\\(y).0>.0)<d>", CalcId::Pid(1)).unwrap();
        let Term::App(f, args) = &t else { panic!("{t:?}") };
        assert!(matches!(&**f, Term::Abs(ps, _) if ps == &vec![Param::Name(Sym::new("x"))]));
        assert_eq!(args, &vec![Arg::Name(Name::c("d"))]);
        let Term::Abs(_, body) = &**f else { unreachable!() };
        assert!(matches!(&**body, Term::Output(Name::Var(_), _, _)));
    }

    #[test]
    fn dangling_bar() {
        let e = parse_term("0|", CalcId::Pi).unwrap_err();
        assert!(matches!(e, Error::Parse(ParseError { line: 1, col: 3, .. })), "{e}");
    }

    #[test]
    fn reserved_identifiers_rejected() {
        assert!(matches!(parse_term("#0!.0", CalcId::PiD(1)), Err(Error::Parse(_))));
        let opts = ParseOptions {
            allow_reserved: true,
            ..ParseOptions::new(CalcId::PiD(1))
        };
        assert!(parse_term_with("#0!.0", &opts).is_ok());
    }

    #[test]
    fn sugar() {
        let calc = CalcId::PiD(1);
        let bare = parse_term("a", calc).unwrap();
        assert!(alpha_eq(&bare, &parse_term("a(X).0", calc).unwrap()));
        let send = parse_term("a!", calc).unwrap();
        assert_eq!(send, parse_term("a!<\\(Y0).0>.0", calc).unwrap());
        let tau = parse_term("tau.a!", calc).unwrap();
        assert!(matches!(tau, Term::Res(..)));
    }

    #[test]
    fn precedence() {
        let calc = CalcId::PiD(1);
        let t = parse_term("a(X).X<\\(Y). b!> | c!", calc).unwrap();
        assert!(matches!(t, Term::Par(..)));
        let t = parse_term("new c. c! | c", calc).unwrap();
        assert!(matches!(t, Term::Par(..)));
    }

    #[test]
    fn sort_errors_are_forwarded() {
        assert!(matches!(
            parse_term("!m(z).X<z>", CalcId::Pid(1)),
            Err(Error::Sort(_))
        ));
    }

    #[test]
    fn definitions() {
        let env = parse_defs("// trigger\ndef T [PiD 1] = \\(Z). m!<Z>.0;").unwrap();
        assert_eq!(env.len(), 1);
        let dup = parse_defs("def T [piD1] = 0; def T [piD1] = 0;").unwrap_err();
        assert!(matches!(dup, Error::DuplicateDef(n) if n == "T"));
        let open = parse_defs("def P [piD1] = X<\\(Y). a!>;").unwrap_err();
        assert!(matches!(open, Error::OpenTerm { .. }));
        let env = parse_defs("def T [piD1] = \\(Z). m!<Z>.0; def P [piD1] = a!<T>.0;").unwrap();
        assert!(matches!(env.get("P").unwrap().term, Term::Output(..)));
    }
}
