use std::fmt;

use crate::grmod::GradedModulePresentation;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QdError, Result};
use crate::polyring::RingSpec;

use super::catalog::psi_module;
use super::mf::spinor_modules;

/// Bundle expressions. Twist binds tightest and `*` is the tensor product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BundleExpr {
    Line(i32),
    U,
    Ustar,
    SpinorPlus,
    SpinorMinus,
    Sym(usize, Box<BundleExpr>),
    Frob(Box<BundleExpr>),
    Twist(Box<BundleExpr>, i32),
    Tensor(Box<BundleExpr>, Box<BundleExpr>),
    /// The kernel bundle `Ψ_i` of the Koszul complex.
    Psi(usize),
}

impl fmt::Display for BundleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleExpr::Line(d) => write!(f, "O({d})"),
            BundleExpr::U => write!(f, "U"),
            BundleExpr::Ustar => write!(f, "Ustar"),
            BundleExpr::SpinorPlus => write!(f, "Spinor+"),
            BundleExpr::SpinorMinus => write!(f, "Spinor-"),
            BundleExpr::Sym(k, e) => write!(f, "Sym({k},{e})"),
            BundleExpr::Frob(e) => write!(f, "Frob({e})"),
            BundleExpr::Twist(e, d) => write!(f, "{e}({d})"),
            BundleExpr::Tensor(a, b) => write!(f, "{a}*{b}"),
            BundleExpr::Psi(i) => write!(f, "Psi({i})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(QdError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<i64>() {
            Ok(v) if v.abs() <= 1 << 20 => Ok(v),
            _ => {
                self.pos = start;
                self.err("expected integer")
            }
        }
    }

    fn expr(&mut self) -> Result<BundleExpr> {
        let mut lhs = self.twisted()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.twisted()?;
            lhs = BundleExpr::Tensor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn twisted(&mut self) -> Result<BundleExpr> {
        let mut e = self.atom()?;
        while self.peek() == Some(b'(') {
            self.pos += 1;
            let d = self.int()? as i32;
            self.eat(b')')?;
            e = BundleExpr::Twist(Box::new(e), d);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<BundleExpr> {
        if self.keyword("O(") {
            let d = self.int()? as i32;
            self.eat(b')')?;
            Ok(BundleExpr::Line(d))
        } else if self.keyword("Ustar") {
            Ok(BundleExpr::Ustar)
        } else if self.keyword("U") {
            Ok(BundleExpr::U)
        } else if self.keyword("Spinor+") {
            Ok(BundleExpr::SpinorPlus)
        } else if self.keyword("Spinor-") {
            Ok(BundleExpr::SpinorMinus)
        } else if self.keyword("Sym(") {
            let k = self.int()?;
            if k < 0 {
                return self.err("symmetric power must be nonnegative");
            }
            self.eat(b',')?;
            let inner = self.expr()?;
            self.eat(b')')?;
            Ok(BundleExpr::Sym(k as usize, Box::new(inner)))
        } else if self.keyword("Psi(") {
            let i = self.int()?;
            if i < 1 {
                return self.err("Psi index must be positive");
            }
            self.eat(b')')?;
            Ok(BundleExpr::Psi(i as usize))
        } else if self.keyword("Frob(") {
            let inner = self.expr()?;
            self.eat(b')')?;
            Ok(BundleExpr::Frob(Box::new(inner)))
        } else {
            self.err("expected a bundle")
        }
    }
}

impl BundleExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// Module over the quadric of dimension `n` in characteristic `p`.
    /// `U^*` is the first spinor module and `U = U^*(-1)`.
    pub fn realize(&self, n: usize, p: u32) -> Result<GradedModulePresentation> {
        Ok(match self {
            BundleExpr::Line(d) => GradedModulePresentation::line_bundle(&RingSpec::quadric(n, p)?, *d)?,
            BundleExpr::U => spinor_modules(n, p)?.0.twist(-1),
            BundleExpr::Ustar | BundleExpr::SpinorPlus => spinor_modules(n, p)?.0,
            BundleExpr::SpinorMinus => spinor_modules(n, p)?.1,
            BundleExpr::Sym(k, e) => e.realize(n, p)?.sym_power(*k),
            BundleExpr::Frob(e) => e.realize(n, p)?.frobenius_pullback(),
            BundleExpr::Twist(e, d) => e.realize(n, p)?.twist(*d),
            BundleExpr::Tensor(a, b) => a.realize(n, p)?.tensor(&b.realize(n, p)?)?,
            BundleExpr::Psi(i) => psi_module(n, *i, p)?.module,
        })
    }

    /// Normal form on `Q_n` in characteristic `p`: twists are collected
    /// outermost, Frobenius and symmetric powers of line bundles are
    /// evaluated, and `U^*` is written `U(1)`. Two expressions with the same
    /// normal form realize isomorphic sheaves.
    pub fn normalize(&self, n: usize, p: u32) -> BundleExpr {
        use BundleExpr::*;
        match self {
            Line(_) | U | Psi(_) => self.clone(),
            Ustar | SpinorPlus => twisted(U, 1),
            // one spinor bundle in odd dimension
            SpinorMinus if n % 2 == 1 => twisted(U, 1),
            SpinorMinus => SpinorMinus,
            Twist(e, d) => twisted(e.normalize(n, p), *d),
            Frob(e) => match e.normalize(n, p) {
                Line(d) => Line(d * p as i32),
                Twist(x, d) => twisted(Frob(x), d * p as i32),
                x => Frob(Box::new(x)),
            },
            Sym(k, e) => match (*k, e.normalize(n, p)) {
                (0, _) => Line(0),
                (1, x) => x,
                (k, Line(d)) => Line(k as i32 * d),
                (k, Twist(x, d)) => twisted(Sym(k, x), k as i32 * d),
                (k, x) => Sym(k, Box::new(x)),
            },
            Tensor(a, b) => {
                let (a, da) = a.normalize(n, p).split_twist();
                let (b, db) = b.normalize(n, p).split_twist();
                let core = match (a, b) {
                    (Line(0), x) | (x, Line(0)) => x,
                    (x, y) => Tensor(Box::new(x), Box::new(y)),
                };
                twisted(core, da + db)
            }
        }
    }

    fn split_twist(self) -> (BundleExpr, i32) {
        match self {
            BundleExpr::Twist(x, d) => (*x, d),
            BundleExpr::Line(d) => (BundleExpr::Line(0), d),
            x => (x, 0),
        }
    }

    /// Dual bundle in normal form, for the rank-2 spinor family on `Q_3` and
    /// `Q_4` and line bundles; `None` outside that range.
    pub fn dual(&self, n: usize, p: u32) -> Option<BundleExpr> {
        use BundleExpr::*;
        match self.normalize(n, p) {
            Line(d) => Some(Line(-d)),
            // rank two with determinant O(-1)
            U if (3..=4).contains(&n) => Some(twisted(U, 1)),
            SpinorMinus if n == 4 => Some(twisted(SpinorMinus, -1)),
            Frob(x) => x.dual(n, p).map(|d| Frob(Box::new(d)).normalize(n, p)),
            Twist(x, d) => x.dual(n, p).map(|x| twisted(x, -d)),
            _ => None,
        }
    }
}

fn twisted(e: BundleExpr, d: i32) -> BundleExpr {
    match e {
        BundleExpr::Line(a) => BundleExpr::Line(a + d),
        BundleExpr::Twist(x, a) if a + d == 0 => *x,
        BundleExpr::Twist(x, a) => BundleExpr::Twist(x, a + d),
        x if d == 0 => x,
        x => BundleExpr::Twist(Box::new(x), d),
    }
}

impl Serialize for BundleExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BundleExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        BundleExpr::parse(&text).map_err(serde::de::Error::custom)
    }
}
