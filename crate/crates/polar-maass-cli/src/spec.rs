//! JSON principal-part specifications.

use polar_maass::arith::Cusp;
use polar_maass::poincarebasis::PrincipalPartSpec;
use polar_maass::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuspPartJson {
    pub cusp: String,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticPartJson {
    pub tau_re: f64,
    pub tau_im: f64,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    #[serde(rename = "N")]
    pub level: u64,
    pub k: u32,
    #[serde(default)]
    pub cusp_parts: Vec<CuspPartJson>,
    #[serde(default)]
    pub elliptic_parts: Vec<EllipticPartJson>,
}

impl SpecJson {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::SpecParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_spec(&self) -> Result<PrincipalPartSpec, CliError> {
        if self.level == 0 || self.level > polar_maass::arith::MAX_LEVEL {
            return Err(CliError::UnsupportedLevel(self.level));
        }
        let mut spec = PrincipalPartSpec::new(self.level, self.k);
        for part in &self.cusp_parts {
            let cusp = Cusp::parse(self.level, &part.cusp)?;
            for t in &part.terms {
                spec.add_cusp_term(cusp.clone(), t.n, C64::new(t.re, t.im));
            }
        }
        for part in &self.elliptic_parts {
            let tau = C64::new(part.tau_re, part.tau_im);
            for t in &part.terms {
                spec.add_elliptic_term(tau, t.n, C64::new(t.re, t.im));
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_schema() {
        let text = r#"{"N": 11, "k": 1,
            "cusp_parts": [{"cusp": "inf", "terms": [{"n": -1, "re": 1.0, "im": 0.0}]}],
            "elliptic_parts": [{"tau_re": 0.1, "tau_im": 0.8, "terms": [{"n": -1, "re": 2.0, "im": -1.0}]}]}"#;
        let spec = SpecJson::parse(text).unwrap().to_spec().unwrap();
        assert_eq!(spec.level, 11);
        assert_eq!(spec.cusp_parts.len(), 1);
        assert_eq!(spec.elliptic_parts[0].terms[&-1], C64::new(2.0, -1.0));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = SpecJson::parse("{\"N\": 1,\n  \"k\": }").unwrap_err();
        match err {
            CliError::SpecParse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_bad_cusp_and_level() {
        let bad_cusp = r#"{"N": 11, "k": 1, "cusp_parts": [{"cusp": "x", "terms": []}]}"#;
        assert!(matches!(SpecJson::parse(bad_cusp).unwrap().to_spec(), Err(CliError::Arith(_))));
        let big = r#"{"N": 20000, "k": 1}"#;
        assert!(matches!(SpecJson::parse(big).unwrap().to_spec(), Err(CliError::UnsupportedLevel(20000))));
    }
}
