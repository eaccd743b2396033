//! Text form of oracle compositions, used by the command line.
//!
//! ```text
//! pipeline := source ('|' stage)*
//! source   := 'expr' STRING 'on' BOX | 'indicator' REGION | 'zero' UINT
//! stage    := 'abs' | 'pos' | 'neg' | 'scale' NUMBER | 'restrict' REGION
//!           | 'compose' STRING ('deriv' STRING)?
//!           | 'add' NUMBER NUMBER '(' pipeline ')'
//!           | ('mul' | 'max' | 'min') '(' pipeline ')'
//! REGION   := inline JSON object | path to a JSON file
//! ```
//!
//! `add a b (P)` is `a * current + b * P`.

use super::{
    abs, add, from_expr, indicator, lipschitz_compose, max, min, mul, neg_part, pos_part, restrict, scale,
    zero, Oracle, Region,
};
use crate::error::{Error, Result};
use crate::expr;
use crate::geometry::DyadicBox;

/// Resolves a region reference (a file path) to a region.
pub type RegionLoader<'a> = &'a dyn Fn(&str) -> Result<Region>;

pub fn parse_pipeline(text: &str, loader: RegionLoader<'_>) -> Result<Oracle> {
    let mut p = Parser { src: text, pos: 0, loader };
    let o = p.pipeline()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(o)
}

struct Parser<'a, 'l> {
    src: &'a str,
    pos: usize,
    loader: RegionLoader<'l>,
}

impl Parser<'_, '_> {
    fn err(&self, message: &str) -> Error {
        Error::Invalid(format!("pipeline: {message} at byte {}", self.pos))
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
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
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn word(&mut self) -> Result<String> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a keyword"));
        }
        let w = self.rest()[..len].to_string();
        self.pos += len;
        Ok(w)
    }

    /// A bare token: runs to whitespace, `|` or `)`.
    fn bare(&mut self) -> Result<String> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || c == '|' || c == ')')
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a value"));
        }
        let w = self.rest()[..len].to_string();
        self.pos += len;
        Ok(w)
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let w = self.bare()?;
        w.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
            self.pos = start;
            self.err(&format!("`{w}` is not a number"))
        })
    }

    fn string(&mut self) -> Result<String> {
        self.skip_ws();
        let Some(q) = self.rest().chars().next().filter(|c| *c == '"' || *c == '\'') else {
            return Err(self.err("expected a quoted string"));
        };
        let body = &self.rest()[1..];
        let Some(end) = body.find(q) else {
            return Err(self.err("unterminated string"));
        };
        let s = body[..end].to_string();
        self.pos += end + 2;
        Ok(s)
    }

    fn box_literal(&mut self) -> Result<DyadicBox> {
        self.skip_ws();
        let start = self.pos;
        loop {
            if !(self.rest().starts_with('[') || self.rest().starts_with('(')) {
                return Err(self.err("expected a box literal"));
            }
            let Some(close) = self.rest().find([']', ')']) else {
                return Err(self.err("unterminated box literal"));
            };
            self.pos += close + 1;
            let r = self.rest();
            let sep = ['x', 'X', '*', '\u{d7}']
                .into_iter()
                .find(|&c| r.starts_with(c) && r[c.len_utf8()..].starts_with(['[', '(']));
            match sep {
                Some(c) => self.pos += c.len_utf8(),
                None => break,
            }
        }
        Ok(DyadicBox::parse(&self.src[start..self.pos])?)
    }

    fn region(&mut self) -> Result<Region> {
        self.skip_ws();
        if self.rest().starts_with('{') {
            let mut depth = 0usize;
            let mut in_str = false;
            for (i, c) in self.rest().char_indices() {
                match c {
                    '"' => in_str = !in_str,
                    '{' if !in_str => depth += 1,
                    '}' if !in_str => {
                        depth -= 1;
                        if depth == 0 {
                            let json = &self.rest()[..=i];
                            let r = Region::from_json(json)?;
                            self.pos += i + 1;
                            return Ok(r);
                        }
                    }
                    _ => {}
                }
            }
            return Err(self.err("unbalanced braces in region"));
        }
        let path = self.bare()?;
        (self.loader)(&path)
    }

    fn pipeline(&mut self) -> Result<Oracle> {
        let mut o = self.source()?;
        while self.eat('|') {
            o = self.stage(o)?;
        }
        Ok(o)
    }

    fn group(&mut self) -> Result<Oracle> {
        self.expect('(')?;
        let o = self.pipeline()?;
        self.expect(')')?;
        Ok(o)
    }

    fn source(&mut self) -> Result<Oracle> {
        let start = self.pos;
        match self.word()?.as_str() {
            "expr" => {
                let e = self.string()?;
                if self.word()? != "on" {
                    return Err(self.err("expected `on`"));
                }
                let support = self.box_literal()?;
                let expr = expr::parse(&e, support.dim())?;
                from_expr(expr, support)
            }
            "indicator" => Ok(indicator(self.region()?)),
            "zero" => {
                let d = self.number()?;
                if d < 1.0 || d.fract() != 0.0 {
                    return Err(self.err("zero needs a positive dimension"));
                }
                Ok(zero(d as usize))
            }
            w => {
                self.pos = start;
                Err(self.err(&format!("unknown source `{w}`")))
            }
        }
    }

    fn stage(&mut self, o: Oracle) -> Result<Oracle> {
        self.skip_ws();
        let start = self.pos;
        match self.word()?.as_str() {
            "abs" => Ok(abs(o)),
            "pos" => Ok(pos_part(o)),
            "neg" => Ok(neg_part(o)),
            "scale" => scale(o, self.number()?),
            "restrict" => restrict(o, self.region()?),
            "compose" => {
                let phi = expr::parse(&self.string()?, 1)?;
                let save = self.pos;
                let deriv = if self.word().ok().as_deref() == Some("deriv") {
                    Some(expr::parse(&self.string()?, 1)?)
                } else {
                    self.pos = save;
                    None
                };
                lipschitz_compose(phi, o, deriv)
            }
            "add" => {
                let a = self.number()?;
                let b = self.number()?;
                add(o, self.group()?, a, b)
            }
            "mul" => mul(o, self.group()?),
            "max" => max(o, self.group()?),
            "min" => min(o, self.group()?),
            w => {
                self.pos = start;
                Err(self.err(&format!("unknown stage `{w}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DyadicCube;
    use crate::interval::Interval;

    fn no_files(path: &str) -> Result<Region> {
        Err(Error::Invalid(format!("no file {path}")))
    }

    fn parse(text: &str) -> Result<Oracle> {
        parse_pipeline(text, &no_files)
    }

    fn cube(level: u32, corner: &[i64]) -> DyadicCube {
        DyadicCube::new(level, corner.to_vec()).unwrap()
    }

    #[test]
    fn sources_and_stages() {
        let o = parse(r#"expr "x1 - 0.5" on [0,1) | abs | scale 2"#).unwrap();
        assert_eq!(o.bounds(&cube(0, &[0])).unwrap(), Interval::new(0.0, 1.0));
        let o = parse(r#"expr "x1" on [-1,1) | neg"#).unwrap();
        assert_eq!(o.bounds(&cube(0, &[-1])).unwrap(), Interval::UNIT);
        let o = parse(r#"expr "x1" on [0,1) | add 1 -1 (expr "x1" on [0,1))"#).unwrap();
        assert!(o.bounds(&cube(0, &[0])).unwrap().contains(0.0));
        let o = parse(
            r#"expr "1" on [-2,2)x[-2,2) | restrict {"dim":2,"bbox":"[-1,1]x[-1,1]","constraints":[{"expr":"x1^2 + x2^2 - 1"}]}"#,
        )
        .unwrap();
        assert_eq!(o.bounds(&cube(1, &[0, 0])).unwrap(), Interval::ONE);
        let o = parse(r#"expr "x1" on (0,1] | compose "x1^2" deriv "2*x1" | max (zero 1)"#).unwrap();
        assert_eq!(o.bounds(&cube(0, &[0])).unwrap(), Interval::UNIT);
    }

    #[test]
    fn region_files_go_through_the_loader() {
        let loader = |path: &str| -> Result<Region> {
            assert_eq!(path, "square.json");
            Ok(Region::from_box(DyadicBox::unit(2)))
        };
        let o = parse_pipeline("indicator square.json", &loader).unwrap();
        assert!(o.is_indicator());
        assert!(parse("indicator missing.json").is_err());
    }

    #[test]
    fn errors() {
        for bad in [
            "",
            "expr x1 on [0,1)",
            r#"expr "x1" [0,1)"#,
            r#"expr "x2" on [0,1)"#,
            r#"expr "x1" on [0,1) | frobnicate"#,
            r#"expr "x1" on [0,1) | scale two"#,
            r#"expr "x1" on [0,1) | mul (expr "x1" on [0,1)x[0,1))"#,
            r#"expr "x1" on [0,1) | compose "x1 + 1""#,
            r#"expr "x1" on [0,1) trailing"#,
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }
}
