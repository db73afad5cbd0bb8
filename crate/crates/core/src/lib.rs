//! Linear programming lower bounds on the length of regular expressions for
//! finite languages, with exact solving, certificates and a brute-force oracle.

pub mod combin;
pub mod certificates;
pub mod closure;
pub mod error;
pub mod lang;
pub mod lp;
pub mod oracle;
pub mod rational;
pub mod regex;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use lang::{Alphabet, Family, LangKey, Language};
pub use rational::Rational;
pub use regex::{Regex, Term};
