//! Channel definitions, expected-time arithmetic and the linear random-utility
//! model of the choice between the live-agent channel (A) and the chatbot
//! gatekeeper channel (B).
//!
//! Utilities carry standard extreme-value noise with unit scale, so all cost
//! parameters are expressed in noise-scale units. The service reward `r`
//! cancels in the utility difference and is fixed at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reward for service completion, normalized away.
pub const REWARD: f64 = 0.0;

/// Time scale of an experiment arm; the long arm doubles every duration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scale {
    Short,
    Long,
}

impl Scale {
    pub fn factor(self) -> u8 {
        match self {
            Scale::Short => 1,
            Scale::Long => 2,
        }
    }
}

impl TryFrom<u8> for Scale {
    type Error = Error;

    fn try_from(s: u8) -> Result<Self> {
        match s {
            1 => Ok(Scale::Short),
            2 => Ok(Scale::Long),
            other => Err(Error::InvalidScale(other)),
        }
    }
}

impl From<Scale> for u8 {
    fn from(s: Scale) -> u8 {
        s.factor()
    }
}

/// Live-agent channel: wait in line, then a single certain service stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelA {
    pub t_line: f64,
    pub t_serve: f64,
}

impl ChannelA {
    pub fn new(t_line: f64, t_serve: f64) -> Result<Self> {
        let a = ChannelA { t_line, t_serve };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_line.is_finite() && self.t_line >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_line_A = {}",
                self.t_line
            )));
        }
        if !(self.t_serve.is_finite() && self.t_serve > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_serve_A = {}",
                self.t_serve
            )));
        }
        Ok(())
    }

    pub fn expected_time(&self) -> f64 {
        self.t_line + self.t_serve
    }
}

/// Chatbot channel: an immediate first stage that succeeds with probability
/// `p_success`; on failure the customer waits in line for a second stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelB {
    pub t_serve1: f64,
    pub p_success: f64,
    pub t_line: f64,
    pub t_serve2: f64,
}

impl ChannelB {
    pub fn new(t_serve1: f64, p_success: f64, t_line: f64, t_serve2: f64) -> Result<Self> {
        let b = ChannelB {
            t_serve1,
            p_success,
            t_line,
            t_serve2,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_success) {
            return Err(Error::InvalidParameter(format!("p_B = {}", self.p_success)));
        }
        for (name, v) in [
            ("t_serve1_B", self.t_serve1),
            ("t_line_B", self.t_line),
            ("t_serve2_B", self.t_serve2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    pub fn expected_time(&self) -> f64 {
        self.t_serve1 + (1.0 - self.p_success) * (self.t_line + self.t_serve2)
    }
}

/// One binary choice from the decision grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionProblem {
    pub set_index: u8,
    pub position: u8,
    pub a: ChannelA,
    pub b: ChannelB,
    pub scale: Scale,
}

impl DecisionProblem {
    /// `E[T_A] - E[T_B]`; positive values favour the chatbot.
    pub fn expected_time_difference(&self) -> f64 {
        self.a.expected_time() - self.b.expected_time()
    }
}

/// Structural parameters of the channel utilities.
///
/// `Default` is the shipped stand-in vector used by the counterfactual
/// module; it is a reasonable configuration, not an estimate from data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityParams {
    /// Cost per second waiting in line.
    pub c_line: f64,
    /// Cost per second with the live agent.
    pub c_agent: f64,
    /// Cost per second with the chatbot.
    pub c_bot: f64,
    /// Lump-sum cost of a failure by a non-transparent chatbot.
    pub c_nt: f64,
    /// Failure-path delay multiplier without the nudge.
    pub beta_base: f64,
    /// Failure-path delay multiplier with the nudge.
    pub beta_nudge: f64,
}

impl Default for UtilityParams {
    fn default() -> Self {
        UtilityParams {
            c_line: 0.05,
            c_agent: 0.03,
            c_bot: 0.04,
            c_nt: 1.0,
            beta_base: 1.5,
            beta_nudge: 1.0,
        }
    }
}

impl UtilityParams {
    pub const NAMES: [&'static str; 6] = [
        "c_line",
        "c_agent",
        "c_bot",
        "c_nt",
        "beta_base",
        "beta_nudge",
    ];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.c_line,
            self.c_agent,
            self.c_bot,
            self.c_nt,
            self.beta_base,
            self.beta_nudge,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        UtilityParams {
            c_line: v[0],
            c_agent: v[1],
            c_bot: v[2],
            c_nt: v[3],
            beta_base: v[4],
            beta_nudge: v[5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    /// Human-readable warnings for negative cost components. Negative costs
    /// are legal; they are only flagged.
    pub fn cost_warnings(&self) -> Vec<String> {
        Self::NAMES[..4]
            .iter()
            .zip(self.to_array())
            .filter(|(_, v)| *v < 0.0)
            .map(|(name, v)| format!("{name} is negative ({v})"))
            .collect()
    }
}

/// Presentation flags of a treatment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentConfig {
    pub context: bool,
    pub transparency: bool,
    pub nudge: bool,
    pub deterministic: bool,
    pub scale: Scale,
}

impl TreatmentConfig {
    pub fn new(
        context: bool,
        transparency: bool,
        nudge: bool,
        deterministic: bool,
        scale: Scale,
    ) -> Result<Self> {
        let t = TreatmentConfig {
            context,
            transparency,
            nudge,
            deterministic,
            scale,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.deterministic && self.context {
            return Err(Error::InvalidParameter(
                "the deterministic treatment is context-free".into(),
            ));
        }
        Ok(())
    }

    pub fn context(scale: Scale) -> Self {
        TreatmentConfig {
            context: true,
            transparency: true,
            nudge: false,
            deterministic: false,
            scale,
        }
    }

    pub fn context_nudge(scale: Scale) -> Self {
        TreatmentConfig {
            nudge: true,
            ..Self::context(scale)
        }
    }

    pub fn context_no_transparency(scale: Scale) -> Self {
        TreatmentConfig {
            transparency: false,
            ..Self::context(scale)
        }
    }

    pub fn no_context(scale: Scale) -> Self {
        TreatmentConfig {
            context: false,
            ..Self::context(scale)
        }
    }

    pub fn no_context_deterministic(scale: Scale) -> Self {
        TreatmentConfig {
            deterministic: true,
            ..Self::no_context(scale)
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        let mut s = String::from(if self.context {
            "context"
        } else {
            "no_context"
        });
        if self.deterministic {
            s.push_str("+deterministic");
        }
        if !self.transparency {
            s.push_str("+no_transparency");
        }
        if self.nudge {
            s.push_str("+nudge");
        }
        s.push_str(if self.scale == Scale::Short {
            "/short"
        } else {
            "/long"
        });
        s
    }
}

pub fn expected_time_a(a: &ChannelA) -> f64 {
    a.expected_time()
}

pub fn expected_time_b(b: &ChannelB) -> f64 {
    b.expected_time()
}

/// Deterministic utility of the live-agent channel.
pub fn utility_a(theta: &UtilityParams, a: &ChannelA) -> f64 {
    REWARD - theta.c_line * a.t_line - theta.c_agent * a.t_serve
}

/// Deterministic utility of the chatbot channel. Transparency switches off
/// the lump-sum failure cost; the nudge selects the failure-path multiplier.
pub fn utility_b(theta: &UtilityParams, b: &ChannelB, treatment: &TreatmentConfig) -> f64 {
    let c_nt = if treatment.transparency {
        0.0
    } else {
        theta.c_nt
    };
    let beta = if treatment.nudge {
        theta.beta_nudge
    } else {
        theta.beta_base
    };
    let failure_delay = theta.c_line * b.t_line + theta.c_agent * b.t_serve2;
    REWARD - theta.c_bot * b.t_serve1 - (1.0 - b.p_success) * (c_nt + beta * failure_delay)
}

/// `U_B - U_A` for a pair of channels.
pub fn utility_difference(
    theta: &UtilityParams,
    a: &ChannelA,
    b: &ChannelB,
    treatment: &TreatmentConfig,
) -> f64 {
    utility_b(theta, b, treatment) - utility_a(theta, a)
}

/// Logistic function evaluated without overflow for any finite input.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary logit probability of choosing B given both deterministic
/// utilities, evaluated in shifted form.
pub fn logit_prob_b(u_a: f64, u_b: f64) -> f64 {
    logistic(u_b - u_a)
}

/// Probability of choosing the chatbot channel for arbitrary channels.
pub fn choice_prob_b_channels(
    theta: &UtilityParams,
    a: &ChannelA,
    b: &ChannelB,
    treatment: &TreatmentConfig,
) -> f64 {
    logit_prob_b(utility_a(theta, a), utility_b(theta, b, treatment))
}

/// Probability of choosing the chatbot channel in a grid decision.
pub fn choice_prob_b(
    theta: &UtilityParams,
    d: &DecisionProblem,
    treatment: &TreatmentConfig,
) -> f64 {
    choice_prob_b_channels(theta, &d.a, &d.b, treatment)
}
