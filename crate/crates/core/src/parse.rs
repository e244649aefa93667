//! Text grammars for elements, ideals, modules and the other CLI inputs.
//!
//! ```text
//! expr  := ['+'|'-'] term (('+'|'-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | power
//! power := atom ['^' int]
//! atom  := INT | T<i> | s<i> | omega(gamma,n) | nu(gamma,n,m)
//!        | nufull(n,m) | sharp(expr) | '(' expr ')'
//! gamma := s<i> | '[' int (',' int)* ']'
//! ```
//!
//! Whitespace is ignored everywhere. Negative powers are only allowed on
//! group elements.

use crate::characters::{Character, FlatEquation, ZpFlat};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::group_ring::{GammaVector, TightSet};
use crate::ideals::IdealSpec;
use crate::towers::{IdealFamily, InertiaDatum, LambdaPresentation};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    rank: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, rank: usize) -> Self {
        Parser { src, pos: 0, rank }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(got) => self.err(format!("expected '{c}', found '{got}'")),
                None => self.err(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected '{c}'")),
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_ascii_alphabetic() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.src[start..self.pos])
    }

    fn uint(&mut self) -> Result<u64> {
        self.skip_ws();
        match self.digits() {
            Some(d) => d.parse().or_else(|_| self.err("integer too large")),
            None => self.err("expected an integer"),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let v = self.uint()? as i64;
        Ok(if neg { -v } else { v })
    }

    fn int_list(&mut self) -> Result<Vec<i64>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.int()?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn index(&mut self, what: char) -> Result<usize> {
        let start = self.pos;
        let i = match self.digits() {
            Some(d) => d.parse::<usize>().unwrap_or(0),
            None => return self.err(format!("expected an index after '{what}'")),
        };
        if i == 0 || i > self.rank {
            self.pos = start;
            return self.err(format!("{what}{i} is outside 1..={}", self.rank));
        }
        Ok(i - 1)
    }

    fn gamma_vector(&mut self) -> Result<GammaVector> {
        let start = self.pos;
        let v = self.int_list()?;
        if v.len() != self.rank {
            self.pos = start;
            return self.err(format!("vector of length {} in rank {}", v.len(), self.rank));
        }
        Ok(GammaVector::new(v))
    }

    fn gamma(&mut self) -> Result<GammaVector> {
        if self.peek() == Some('[') {
            return self.gamma_vector();
        }
        let w = self.word();
        if w != "s" {
            return self.err("expected s<i> or [..]");
        }
        Ok(GammaVector::basis(self.rank, self.index('s')?))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let first_neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let t = self.term()?;
        terms.push(if first_neg { Expr::Neg(Box::new(t)) } else { t });
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        while self.eat('*') {
            factors.push(self.unary()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let atom = self.atom()?;
        if !self.eat('^') {
            return Ok(atom);
        }
        let start = self.pos;
        let k = self.int()?;
        match atom {
            Expr::Group(g) => Ok(Expr::Group(g.scaled(k))),
            other => {
                if k < 0 {
                    self.pos = start;
                    return self.err("negative powers are only allowed on group elements");
                }
                Ok(Expr::Pow(Box::new(other), u32::try_from(k).or_else(|_| self.err("exponent too large"))?))
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::Int(self.uint()? as i128)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let w = self.word();
                match w.as_str() {
                    "T" => Ok(Expr::Var(self.index('T')?)),
                    "s" => Ok(Expr::Group(GammaVector::basis(self.rank, self.index('s')?))),
                    "omega" => {
                        self.expect('(')?;
                        let s = self.gamma()?;
                        self.expect(',')?;
                        let n = self.int()?;
                        self.expect(')')?;
                        Ok(Expr::Omega(s, n))
                    }
                    "nu" => {
                        self.expect('(')?;
                        let s = self.gamma()?;
                        self.expect(',')?;
                        let n = self.int()?;
                        self.expect(',')?;
                        let m = self.int()?;
                        self.expect(')')?;
                        Ok(Expr::Nu(s, n, m))
                    }
                    "nufull" => {
                        self.expect('(')?;
                        let n = self.int()?;
                        self.expect(',')?;
                        let m = self.int()?;
                        self.expect(')')?;
                        Ok(Expr::NuFull(n, m))
                    }
                    "sharp" => {
                        self.expect('(')?;
                        let e = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Sharp(Box::new(e)))
                    }
                    _ => {
                        self.pos = start;
                        self.err(format!("unknown name '{w}'"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }

    fn expr_list(&mut self) -> Result<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn bracketed_exprs(&mut self) -> Result<Vec<Expr>> {
        self.expect('[')?;
        if self.eat(']') {
            return Ok(Vec::new());
        }
        let out = self.expr_list()?;
        self.expect(']')?;
        Ok(out)
    }

    fn gamma_list(&mut self) -> Result<Vec<GammaVector>> {
        // either `[a,b],[c,d]` or `[[a,b],[c,d]]`
        let save = self.pos;
        self.expect('[')?;
        let nested = self.peek() == Some('[');
        self.pos = save;
        if nested {
            self.expect('[')?;
        }
        let mut out = vec![self.gamma_vector()?];
        while self.eat(',') {
            out.push(self.gamma_vector()?);
        }
        if nested {
            self.expect(']')?;
        }
        Ok(out)
    }

    fn ideal(&mut self) -> Result<IdealSpec> {
        let start = self.pos;
        let w = self.word().to_ascii_uppercase();
        self.expect('(')?;
        let spec = match w.as_str() {
            "AUG" => IdealSpec::Augmentation { n: self.int()? },
            "TIGHT" => {
                let n = self.int()?;
                let taus = if self.eat(';') {
                    let key = self.word();
                    if key != "tau" {
                        return self.err("expected tau=");
                    }
                    self.expect('=')?;
                    TightSet(self.gamma_list()?)
                } else {
                    TightSet::standard(self.rank)
                };
                IdealSpec::Tight { n, taus }
            }
            "RN" => {
                let (mut r, mut n, mut basis) = (None, None, None);
                loop {
                    let key = self.word();
                    self.expect('=')?;
                    match key.as_str() {
                        "r" => r = Some(self.int_list()?),
                        "n" => n = Some(self.int_list()?),
                        "basis" => basis = Some(self.gamma_list()?),
                        _ => return self.err(format!("unknown RN key '{key}'")),
                    }
                    if !self.eat(',') {
                        break;
                    }
                }
                let (Some(r), Some(n)) = (r, n) else {
                    return self.err("RN needs r=[..] and n=[..]");
                };
                let basis = basis.unwrap_or_else(|| GammaVector::standard_basis(self.rank));
                IdealSpec::Rn { basis, r, n }
            }
            "SUM" => {
                let mut parts = vec![self.ideal()?];
                while self.eat(',') {
                    parts.push(self.ideal()?);
                }
                IdealSpec::Sum(parts)
            }
            "EXPL" => {
                if self.peek() == Some('[') {
                    IdealSpec::Explicit(self.bracketed_exprs()?)
                } else {
                    IdealSpec::Explicit(self.expr_list()?)
                }
            }
            _ => {
                self.pos = start;
                return self.err(format!("unknown ideal '{w}'"));
            }
        };
        self.expect(')')?;
        Ok(spec)
    }
}

/// Parses an element expression in rank `rank`.
pub fn parse_expr(src: &str, rank: usize) -> Result<Expr> {
    let mut p = Parser::new(src, rank);
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// `AUG(n)`, `TIGHT(n; tau=[..],..)`, `RN(r=[..], n=[..], basis=[..])`,
/// `SUM(a, b, ..)`, `EXPL([e1, e2])`.
pub fn parse_ideal(src: &str, rank: usize) -> Result<IdealSpec> {
    let mut p = Parser::new(src, rank);
    let s = p.ideal()?;
    p.finish()?;
    Ok(s)
}

/// `free`, `free(r)`, `free^r`, `quot e1, e2`, `quot(e1, e2)` or
/// `pres(g; row; row)` with rows of `g` comma-separated expressions.
pub fn parse_module(src: &str, rank: usize) -> Result<LambdaPresentation> {
    let mut p = Parser::new(src, rank);
    let start = p.pos;
    let w = p.word();
    let pres = match w.as_str() {
        "free" => {
            let g = if p.eat('(') {
                let g = p.uint()?;
                p.expect(')')?;
                g
            } else if p.eat('^') {
                p.uint()?
            } else {
                1
            };
            if g == 0 {
                return p.err("free module of rank 0");
            }
            LambdaPresentation::free(g as usize)
        }
        "quot" => {
            let save = p.pos;
            let attempt = p.expr_list();
            match attempt.and_then(|l| p.finish().map(|_| l)) {
                Ok(list) => LambdaPresentation::cyclic(list),
                Err(first) => {
                    p.pos = save;
                    if !p.eat('(') {
                        return Err(first);
                    }
                    let list = p.expr_list()?;
                    p.expect(')')?;
                    LambdaPresentation::cyclic(list)
                }
            }
        }
        "pres" => {
            p.expect('(')?;
            let g = p.uint()? as usize;
            let mut rows = Vec::new();
            while p.eat(';') {
                let row_start = p.pos;
                let row = p.expr_list()?;
                if row.len() != g {
                    p.pos = row_start;
                    return p.err(format!("relation with {} entries for {g} generators", row.len()));
                }
                rows.push(row);
            }
            p.expect(')')?;
            LambdaPresentation::new(g, rows).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })?
        }
        _ => {
            p.pos = start;
            return p.err(format!("unknown module form '{w}'"));
        }
    };
    p.finish()?;
    Ok(pres)
}

/// `[1,0],[0,1],[1,1]`, optionally wrapped in an outer pair of brackets.
pub fn parse_tight_set(src: &str, rank: usize) -> Result<TightSet> {
    let mut p = Parser::new(src, rank);
    let v = p.gamma_list()?;
    p.finish()?;
    Ok(TightSet(v))
}

/// `j=expr; j=[e1,e2]` with `j` a 1-based index into the tight set. An
/// empty string is the empty datum.
pub fn parse_inertia(src: &str, rank: usize, generators: usize) -> Result<InertiaDatum> {
    let mut p = Parser::new(src, rank);
    let mut pairs = Vec::new();
    if p.at_end() {
        return Ok(InertiaDatum::default());
    }
    loop {
        let j = p.uint()? as usize;
        if j == 0 {
            return p.err("tau indices start at 1");
        }
        p.expect('=')?;
        let start = p.pos;
        let x = if p.peek() == Some('[') { p.bracketed_exprs()? } else { vec![p.expr()?] };
        if x.len() != generators {
            p.pos = start;
            return p.err(format!("offset with {} coordinates for {generators} generators", x.len()));
        }
        pairs.push((j - 1, x));
        if !p.eat(';') {
            break;
        }
    }
    p.finish()?;
    Ok(InertiaDatum::new(pairs))
}

/// `e1,e2@m` or `[e1,e2]@m`: `chi(sigma_i) = zeta_{p^m}^{e_i}`.
pub fn parse_character(src: &str, p: u64, rank: usize) -> Result<Character> {
    let mut ps = Parser::new(src, rank);
    let bracket = ps.eat('[');
    let mut exps = vec![ps.uint()?];
    while ps.eat(',') {
        exps.push(ps.uint()?);
    }
    if bracket {
        ps.expect(']')?;
    }
    if exps.len() != rank {
        return ps.err(format!("{} exponents for rank {rank}", exps.len()));
    }
    ps.expect('@')?;
    let level = ps.uint()? as u32;
    ps.finish()?;
    Character::new(p, level, exps).map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })
}

/// `I`/`AUG`, `J`/`TIGHT` (with the given tight set).
pub fn parse_family(src: &str, taus: &TightSet) -> Result<IdealFamily> {
    match src.trim().to_ascii_uppercase().as_str() {
        "I" | "AUG" => Ok(IdealFamily::Augmentation),
        "J" | "TIGHT" => Ok(IdealFamily::Tight(taus.clone())),
        other => Err(Error::Parse { pos: 0, msg: format!("unknown family '{other}', expected I or J") }),
    }
}

/// Flats separated by `|`, equations by `;`, each `gamma=root@level`.
pub fn parse_flats(src: &str, p: u64, rank: usize) -> Result<Vec<ZpFlat>> {
    let mut ps = Parser::new(src, rank);
    let mut flats = Vec::new();
    loop {
        let start = ps.pos;
        let mut eqs = Vec::new();
        loop {
            let xi = ps.gamma()?;
            ps.expect('=')?;
            let root = ps.uint()?;
            ps.expect('@')?;
            let level = ps.uint()? as u32;
            eqs.push(FlatEquation { xi, root, level });
            if !ps.eat(';') {
                break;
            }
        }
        flats.push(ZpFlat::new(p, rank, eqs).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })?);
        if !ps.eat('|') {
            break;
        }
    }
    ps.finish()?;
    Ok(flats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_ring::GroupRing;

    #[test]
    fn expressions() {
        let ring = GroupRing::new(2, 2, 2, 3).unwrap();
        let e = parse_expr(" 1 + T1 ", 2).unwrap();
        assert_eq!(e.eval(&ring).unwrap(), ring.generator(0));
        let e = parse_expr("nu(s1,0,1)*omega([1,1],0) - sharp(T2)^2", 2).unwrap();
        assert!(e.eval(&ring).is_ok());
        let inv = parse_expr("s1^-1*s1", 2).unwrap();
        assert_eq!(inv.eval(&ring).unwrap(), ring.one());
        assert_eq!(parse_expr("-T1", 2).unwrap().eval(&ring).unwrap(), (&ring.one() - &ring.generator(0)));
    }

    #[test]
    fn expression_errors_carry_positions() {
        match parse_expr("1 + T3", 2) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("T1^-1", 2), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("1 +", 2), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("foo(1)", 2), Err(Error::Parse { pos: 0, .. })));
    }

    #[test]
    fn ideals() {
        assert_eq!(parse_ideal("AUG(1)", 2).unwrap(), IdealSpec::Augmentation { n: 1 });
        let t = parse_ideal("TIGHT(2; tau=[1,0],[0,1],[1,1])", 2).unwrap();
        assert!(matches!(t, IdealSpec::Tight { n: 2, ref taus } if taus.taus().len() == 3));
        let r = parse_ideal("RN(r=[0,-1], n=[1,2])", 2).unwrap();
        assert_eq!(r, IdealSpec::rn(vec![0, -1], vec![1, 2]));
        let s = parse_ideal("SUM(RN(r=[0,0],n=[1,1]), TIGHT(1))", 2).unwrap();
        assert!(matches!(s, IdealSpec::Sum(ref v) if v.len() == 2));
        assert_eq!(parse_ideal("EXPL([T1, T2])", 2).unwrap(), parse_ideal("expl(T1,T2)", 2).unwrap());
    }

    #[test]
    fn modules() {
        assert_eq!(parse_module("free", 2).unwrap(), LambdaPresentation::free(1));
        assert_eq!(parse_module("free^2", 2).unwrap(), LambdaPresentation::free(2));
        assert_eq!(parse_module("free(2)", 2).unwrap(), LambdaPresentation::free(2));
        let q = parse_module("quot nu(s1,0,1)", 2).unwrap();
        assert_eq!(q, parse_module("quot(nu(s1,0,1))", 2).unwrap());
        let q2 = parse_module("quot 2, T1", 2).unwrap();
        assert_eq!(q2.relations().len(), 2);
        let pr = parse_module("pres(2; T1, 0; 0, 2)", 2).unwrap();
        assert_eq!(pr.generators(), 2);
        assert!(parse_module("pres(2; T1)", 2).is_err());
    }

    #[test]
    fn misc_inputs() {
        assert_eq!(parse_tight_set("[[1,0],[0,1]]", 2).unwrap(), TightSet::standard(2));
        let d = parse_inertia("1=1; 2=T1", 2, 1).unwrap();
        assert_eq!(d.pairs.len(), 2);
        assert_eq!(d.pairs[1].0, 1);
        let chi = parse_character("[1,0]@1", 2, 2).unwrap();
        assert_eq!(chi, parse_character("1,0@1", 2, 2).unwrap());
        assert!(parse_character("4@2", 2, 1).is_err());
        let flats = parse_flats("[1,0]=1@1 | s2=1@1; s1=0@0", 2, 2).unwrap();
        assert_eq!(flats.len(), 2);
    }
}
