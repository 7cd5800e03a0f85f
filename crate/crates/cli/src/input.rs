//! Turning command-line state specifications into states.

use std::str::FromStr;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use tripartite::states::{canonical_to_state, three_spinor_to_state, CanonicalParams, PureState3Q, ThreeSpinorParams};
use tripartite::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Named {
    Ghz,
    W,
    /// |000⟩
    Product,
    /// |0⟩ ⊗ (|00⟩ + |11⟩)/√2
    BellpairA,
}

/// Exactly one way of naming the state.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false, id = "state")]
pub struct StateSpec {
    /// A built-in state.
    #[arg(long, value_enum)]
    pub named: Option<Named>,
    /// Canonical weights μ0..μ4 (comma separated, summing to 1); see --phi.
    #[arg(long, value_name = "MU0,..,MU4")]
    pub canonical: Option<String>,
    /// Three-spinor angles θ1,θ2,θ3 in radians.
    #[arg(long, value_name = "T1,T2,T3")]
    pub spinor: Option<String>,
    /// Eight amplitudes in basis order |000⟩..|111⟩, e.g. 0.6,0,0,0,0,0,0,0.8i.
    #[arg(long, value_name = "Z0,..,Z7", allow_hyphen_values = true)]
    pub amplitudes: Option<String>,
}

/// The phase accompanies --canonical, so it lives outside the exclusive group.
#[derive(Debug, Clone, Args)]
pub struct PhaseArg {
    /// Canonical phase φ in [0, π].
    #[arg(long, default_value_t = 0.0, requires = "canonical")]
    pub phi: f64,
}

/// What was asked for, kept around for the printout.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Named(Named),
    Canonical(CanonicalParams),
    Spinor(ThreeSpinorParams),
    Amplitudes,
}

impl Parsed {
    pub fn describe(&self) -> String {
        match self {
            Parsed::Named(n) => format!("named {}", n.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()),
            Parsed::Canonical(p) => format!("canonical mu={:?} phi={}", p.mu, p.phi),
            Parsed::Spinor(p) => format!("spinor theta=({}, {}, {})", p.theta1, p.theta2, p.theta3),
            Parsed::Amplitudes => "amplitudes".to_string(),
        }
    }
}

pub fn parse_list<T: FromStr>(text: &str, expected: usize, what: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.len() != expected {
        return Err(Error::Parse(format!("{what}: expected {expected} values, got {}", items.len())));
    }
    items
        .iter()
        .map(|s| s.parse::<T>().map_err(|_| Error::Parse(format!("{what}: cannot read {s:?}"))))
        .collect()
}

pub fn resolve(spec: &StateSpec, phase: &PhaseArg) -> Result<(PureState3Q, Parsed)> {
    if let Some(n) = spec.named {
        let s = match n {
            Named::Ghz => PureState3Q::ghz(),
            Named::W => PureState3Q::w(),
            Named::Product => PureState3Q::product_zero(),
            Named::BellpairA => PureState3Q::bellpair_a(),
        };
        return Ok((s, Parsed::Named(n)));
    }
    if let Some(text) = &spec.canonical {
        let mu: Vec<f64> = parse_list(text, 5, "--canonical")?;
        let p = CanonicalParams::new([mu[0], mu[1], mu[2], mu[3], mu[4]], phase.phi)?;
        return Ok((canonical_to_state(&p)?, Parsed::Canonical(p)));
    }
    if let Some(text) = &spec.spinor {
        let t: Vec<f64> = parse_list(text, 3, "--spinor")?;
        let p = ThreeSpinorParams::new(t[0], t[1], t[2])?;
        return Ok((three_spinor_to_state(&p)?, Parsed::Spinor(p)));
    }
    if let Some(text) = &spec.amplitudes {
        let z: Vec<Complex64> = parse_list(text, 8, "--amplitudes")?;
        if z.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("amplitude"));
        }
        let amps: [Complex64; 8] = z.try_into().expect("length checked");
        return Ok((PureState3Q::new(amps)?, Parsed::Amplitudes));
    }
    Err(Error::Parse("no state given".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> StateSpec {
        StateSpec { named: None, canonical: None, spinor: None, amplitudes: None }
    }

    const NO_PHASE: PhaseArg = PhaseArg { phi: 0.0 };

    #[test]
    fn amplitudes_accept_complex_literals() {
        let s = StateSpec { amplitudes: Some("0.6, 0,0,0,0,0,0, 0.8i".into()), ..spec() };
        let (state, _) = resolve(&s, &NO_PHASE).unwrap();
        assert_eq!(state.amplitude(7), Complex64::new(0.0, 0.8));
    }

    #[test]
    fn unnormalized_amplitudes_are_rejected() {
        let s = StateSpec { amplitudes: Some("1,1,0,0,0,0,0,0".into()), ..spec() };
        assert!(matches!(resolve(&s, &NO_PHASE), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn wrong_arity_is_a_parse_error() {
        let s = StateSpec { canonical: Some("0.5,0.5".into()), ..spec() };
        assert!(matches!(resolve(&s, &NO_PHASE), Err(Error::Parse(_))));
        let s = StateSpec { spinor: Some("1,x,2".into()), ..spec() };
        assert!(matches!(resolve(&s, &NO_PHASE), Err(Error::Parse(_))));
    }

    #[test]
    fn canonical_ghz_parameters() {
        let s = StateSpec { canonical: Some("0.5,0,0,0,0.5".into()), ..spec() };
        let (state, parsed) = resolve(&s, &NO_PHASE).unwrap();
        assert!((state.amplitude(0).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(parsed, Parsed::Canonical(_)));
    }
}
