//! CVSS v3.1 base-metric vectors and base-score computation.
//!
//! Reference: https://www.first.org/cvss/v3.1/specification-document
//!
//! Only the eight base metrics are modeled; temporal and environmental
//! scoring are out of scope. The round-up-to-one-decimal step uses the
//! integer formulation from the specification's appendix, which avoids the
//! floating-point banding bugs of naive `ceil`-based versions.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackVector {
    Network,
    Adjacent,
    Local,
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackComplexity {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrivilegesRequired {
    None,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserInteraction {
    None,
    Required,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    Unchanged,
    Changed,
}

/// Impact metric value, shared by confidentiality, integrity, availability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImpactMetric {
    None,
    Low,
    High,
}

impl AttackVector {
    fn weight(self) -> f64 {
        match self {
            AttackVector::Network => 0.85,
            AttackVector::Adjacent => 0.62,
            AttackVector::Local => 0.55,
            AttackVector::Physical => 0.2,
        }
    }

    fn letter(self) -> &'static str {
        match self {
            AttackVector::Network => "N",
            AttackVector::Adjacent => "A",
            AttackVector::Local => "L",
            AttackVector::Physical => "P",
        }
    }
}

impl AttackComplexity {
    fn weight(self) -> f64 {
        match self {
            AttackComplexity::Low => 0.77,
            AttackComplexity::High => 0.44,
        }
    }

    fn letter(self) -> &'static str {
        match self {
            AttackComplexity::Low => "L",
            AttackComplexity::High => "H",
        }
    }
}

impl PrivilegesRequired {
    // PR weights depend on whether the scope changes.
    fn weight(self, scope: Scope) -> f64 {
        match (self, scope) {
            (PrivilegesRequired::None, _) => 0.85,
            (PrivilegesRequired::Low, Scope::Unchanged) => 0.62,
            (PrivilegesRequired::Low, Scope::Changed) => 0.68,
            (PrivilegesRequired::High, Scope::Unchanged) => 0.27,
            (PrivilegesRequired::High, Scope::Changed) => 0.5,
        }
    }

    fn letter(self) -> &'static str {
        match self {
            PrivilegesRequired::None => "N",
            PrivilegesRequired::Low => "L",
            PrivilegesRequired::High => "H",
        }
    }
}

impl UserInteraction {
    fn weight(self) -> f64 {
        match self {
            UserInteraction::None => 0.85,
            UserInteraction::Required => 0.62,
        }
    }

    fn letter(self) -> &'static str {
        match self {
            UserInteraction::None => "N",
            UserInteraction::Required => "R",
        }
    }
}

impl Scope {
    fn letter(self) -> &'static str {
        match self {
            Scope::Unchanged => "U",
            Scope::Changed => "C",
        }
    }
}

impl ImpactMetric {
    fn weight(self) -> f64 {
        match self {
            ImpactMetric::None => 0.0,
            ImpactMetric::Low => 0.22,
            ImpactMetric::High => 0.56,
        }
    }

    fn letter(self) -> &'static str {
        match self {
            ImpactMetric::None => "N",
            ImpactMetric::Low => "L",
            ImpactMetric::High => "H",
        }
    }
}

/// A complete CVSS v3.1 base-metric vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CvssVector {
    pub attack_vector: AttackVector,
    pub attack_complexity: AttackComplexity,
    pub privileges_required: PrivilegesRequired,
    pub user_interaction: UserInteraction,
    pub scope: Scope,
    pub confidentiality: ImpactMetric,
    pub integrity: ImpactMetric,
    pub availability: ImpactMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    None,
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::None => "none",
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
            Severity::Critical => "critical",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Severity::None => "None",
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
            Severity::Critical => "Critical",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed base score: a value in [0.0, 10.0] quantized to 0.1 plus its
/// severity band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvssScore {
    pub value: f64,
    pub severity: Severity,
}

impl CvssScore {
    /// Build a score from tenths (0..=100), deriving the standard severity
    /// banding: 0.0 None, 0.1-3.9 Low, 4.0-6.9 Medium, 7.0-8.9 High,
    /// 9.0-10.0 Critical.
    pub fn from_tenths(tenths: u32) -> CvssScore {
        debug_assert!(tenths <= 100);
        let severity = match tenths {
            0 => Severity::None,
            1..=39 => Severity::Low,
            40..=69 => Severity::Medium,
            70..=89 => Severity::High,
            _ => Severity::Critical,
        };
        CvssScore {
            value: tenths as f64 / 10.0,
            severity,
        }
    }

    pub fn zero() -> CvssScore {
        CvssScore::from_tenths(0)
    }

    /// Score value expressed in tenths, the exact representation.
    pub fn tenths(&self) -> u32 {
        (self.value * 10.0).round() as u32
    }
}

impl Eq for CvssScore {}

impl PartialOrd for CvssScore {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CvssScore {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.tenths().cmp(&other.tenths())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed CVSS vector at offset {position}: {reason}")]
pub struct MalformedVector {
    pub position: usize,
    pub reason: String,
}

impl CvssVector {
    /// Render the canonical string form, metrics in specification order.
    pub fn render(&self) -> String {
        format!(
            "CVSS:3.1/AV:{}/AC:{}/PR:{}/UI:{}/S:{}/C:{}/I:{}/A:{}",
            self.attack_vector.letter(),
            self.attack_complexity.letter(),
            self.privileges_required.letter(),
            self.user_interaction.letter(),
            self.scope.letter(),
            self.confidentiality.letter(),
            self.integrity.letter(),
            self.availability.letter(),
        )
    }

    /// Parse a vector string. All eight base metrics must be present exactly
    /// once; any metric order is accepted.
    pub fn parse(s: &str) -> Result<CvssVector, MalformedVector> {
        let err = |position: usize, reason: &str| MalformedVector {
            position,
            reason: reason.to_string(),
        };

        let prefix = "CVSS:3.1";
        if !s.starts_with(prefix) {
            return Err(err(0, "expected prefix CVSS:3.1"));
        }
        let mut av = None;
        let mut ac = None;
        let mut pr = None;
        let mut ui = None;
        let mut scope = None;
        let mut c = None;
        let mut i = None;
        let mut a = None;

        let mut pos = prefix.len();
        let rest = &s[prefix.len()..];
        for part in rest.split('/') {
            if part.is_empty() {
                pos += 1;
                continue;
            }
            let (key, value) = part
                .split_once(':')
                .ok_or_else(|| err(pos, "metric must be KEY:VALUE"))?;
            macro_rules! set {
                ($slot:ident, $val:expr) => {{
                    if $slot.replace($val).is_some() {
                        return Err(err(pos, &format!("duplicate metric {key}")));
                    }
                }};
            }
            match (key, value) {
                ("AV", "N") => set!(av, AttackVector::Network),
                ("AV", "A") => set!(av, AttackVector::Adjacent),
                ("AV", "L") => set!(av, AttackVector::Local),
                ("AV", "P") => set!(av, AttackVector::Physical),
                ("AC", "L") => set!(ac, AttackComplexity::Low),
                ("AC", "H") => set!(ac, AttackComplexity::High),
                ("PR", "N") => set!(pr, PrivilegesRequired::None),
                ("PR", "L") => set!(pr, PrivilegesRequired::Low),
                ("PR", "H") => set!(pr, PrivilegesRequired::High),
                ("UI", "N") => set!(ui, UserInteraction::None),
                ("UI", "R") => set!(ui, UserInteraction::Required),
                ("S", "U") => set!(scope, Scope::Unchanged),
                ("S", "C") => set!(scope, Scope::Changed),
                ("C", "N") => set!(c, ImpactMetric::None),
                ("C", "L") => set!(c, ImpactMetric::Low),
                ("C", "H") => set!(c, ImpactMetric::High),
                ("I", "N") => set!(i, ImpactMetric::None),
                ("I", "L") => set!(i, ImpactMetric::Low),
                ("I", "H") => set!(i, ImpactMetric::High),
                ("A", "N") => set!(a, ImpactMetric::None),
                ("A", "L") => set!(a, ImpactMetric::Low),
                ("A", "H") => set!(a, ImpactMetric::High),
                _ => {
                    return Err(err(pos, &format!("unknown metric or value {part}")));
                }
            }
            pos += part.len() + 1;
        }

        let missing = |name: &str| err(s.len(), &format!("missing metric {name}"));
        Ok(CvssVector {
            attack_vector: av.ok_or_else(|| missing("AV"))?,
            attack_complexity: ac.ok_or_else(|| missing("AC"))?,
            privileges_required: pr.ok_or_else(|| missing("PR"))?,
            user_interaction: ui.ok_or_else(|| missing("UI"))?,
            scope: scope.ok_or_else(|| missing("S"))?,
            confidentiality: c.ok_or_else(|| missing("C"))?,
            integrity: i.ok_or_else(|| missing("I"))?,
            availability: a.ok_or_else(|| missing("A"))?,
        })
    }

    /// Enumerate all 2,592 base-metric combinations (4*2*3*2*2*3*3*3).
    pub fn enumerate_all() -> Vec<CvssVector> {
        let avs = [
            AttackVector::Network,
            AttackVector::Adjacent,
            AttackVector::Local,
            AttackVector::Physical,
        ];
        let acs = [AttackComplexity::Low, AttackComplexity::High];
        let prs = [
            PrivilegesRequired::None,
            PrivilegesRequired::Low,
            PrivilegesRequired::High,
        ];
        let uis = [UserInteraction::None, UserInteraction::Required];
        let scopes = [Scope::Unchanged, Scope::Changed];
        let impacts = [ImpactMetric::None, ImpactMetric::Low, ImpactMetric::High];

        let mut out = Vec::with_capacity(2592);
        for &attack_vector in &avs {
            for &attack_complexity in &acs {
                for &privileges_required in &prs {
                    for &user_interaction in &uis {
                        for &scope in &scopes {
                            for &confidentiality in &impacts {
                                for &integrity in &impacts {
                                    for &availability in &impacts {
                                        out.push(CvssVector {
                                            attack_vector,
                                            attack_complexity,
                                            privileges_required,
                                            user_interaction,
                                            scope,
                                            confidentiality,
                                            integrity,
                                            availability,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for CvssVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for CvssVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for CvssVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CvssVector::parse(&s).map_err(D::Error::custom)
    }
}

/// Round up to one decimal, using the specification's integer formulation.
/// `roundup(4.02) == 4.1`, `roundup(4.00) == 4.0`.
fn roundup(input: f64) -> f64 {
    let int_input = (input * 100_000.0).round() as i64;
    if int_input % 10_000 == 0 {
        int_input as f64 / 100_000.0
    } else {
        ((int_input / 10_000) + 1) as f64 / 10.0
    }
}

/// Compute the CVSS v3.1 base score for a vector.
pub fn base_score(v: &CvssVector) -> CvssScore {
    let iss = 1.0
        - (1.0 - v.confidentiality.weight())
            * (1.0 - v.integrity.weight())
            * (1.0 - v.availability.weight());

    let impact = match v.scope {
        Scope::Unchanged => 6.42 * iss,
        Scope::Changed => 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15),
    };

    if impact <= 0.0 {
        return CvssScore::zero();
    }

    let exploitability = 8.22
        * v.attack_vector.weight()
        * v.attack_complexity.weight()
        * v.privileges_required.weight(v.scope)
        * v.user_interaction.weight();

    let raw = match v.scope {
        Scope::Unchanged => roundup((impact + exploitability).min(10.0)),
        Scope::Changed => roundup((1.08 * (impact + exploitability)).min(10.0)),
    };

    CvssScore::from_tenths((raw * 10.0).round() as u32)
}
