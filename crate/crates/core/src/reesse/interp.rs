//! Readings of the typographically ambiguous steps of key generation,
//! signing and verification. Every flag defaults to the text as typeset.

use std::fmt;
use std::str::FromStr;

/// `gcd(W, d̄D̄) > 1` at key generation S3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WCondition {
    /// Bars dropped: `gcd(W, d·D) > 1`.
    SmallDivisors,
    /// Bar read as the group order: `gcd(W, M-1) > 1`.
    GroupOrder,
}

/// Where `T` sits in `α ← δ^((σ̄ + δW^(σ̄-1))T)` and `β ← δ^(W^σ̄ T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TPlacement {
    /// `T` multiplies the exponent.
    Multiplier,
    /// `T` is a superscript: `(..)^T` and `W^(σ̄T)`.
    Superscript,
}

/// The leading term of α's exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlphaLead {
    /// `σ̄` as typeset.
    Sigma,
    /// `δ^σ̄`.
    DeltaPowSigma,
}

/// Form of `h̄ ← (W ∏A_i)^(-δS) (αδ^-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HbarForm {
    /// With the full sequence product, as typeset.
    WithSequence,
    /// `W^(-δS) (αδ^-1)`.
    WOnly,
}

/// `U^T` in the first factor of X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UExponent {
    /// Power, as typeset.
    Power,
    /// Product `U·T`.
    Product,
}

/// "If d̄ ∤ (..) then go to S5 else end" at signing S6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopPolarity {
    /// Leave the loop once `d` divides the expression.
    AsPrinted,
    /// Leave the loop once `d` does not divide it.
    Inverted,
}

/// Modulus for exponents that carry no explicit reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentModulus {
    /// `M - 1`, the group order.
    GroupOrder,
    /// `M`, the trailing `% M` of each formula.
    Modulus,
}

/// `G_0 ← (∏ A_i^(-b_i))^δ` at signing S2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum G0Sign {
    /// Negative exponent, as typeset.
    Inverse,
    /// `(∏ A_i^(b_i))^δ`.
    Direct,
}

/// "∏ e_i ≈ 2^8" at key generation S2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentBudget {
    /// Maximize `∏ e_i` within the bits left over.
    Relaxed,
    /// Require `∏ e_i` within a factor two of the profile target.
    Strict,
}

/// One reading of every ambiguous step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InterpretationConfig {
    pub w_condition: WCondition,
    pub t_placement: TPlacement,
    pub alpha_lead: AlphaLead,
    pub hbar: HbarForm,
    pub u_exponent: UExponent,
    pub loop_polarity: LoopPolarity,
    pub exponent_modulus: ExponentModulus,
    pub g0_sign: G0Sign,
    pub exponent_budget: ExponentBudget,
}

impl Default for InterpretationConfig {
    fn default() -> Self {
        Self::as_printed()
    }
}

impl InterpretationConfig {
    pub const fn as_printed() -> Self {
        InterpretationConfig {
            w_condition: WCondition::SmallDivisors,
            t_placement: TPlacement::Multiplier,
            alpha_lead: AlphaLead::Sigma,
            hbar: HbarForm::WithSequence,
            u_exponent: UExponent::Power,
            loop_polarity: LoopPolarity::AsPrinted,
            exponent_modulus: ExponentModulus::GroupOrder,
            g0_sign: G0Sign::Inverse,
            exponent_budget: ExponentBudget::Relaxed,
        }
    }

    /// The reading under which verification closes algebraically: `U·T`,
    /// `δ^σ̄` as α's leading term and `h̄` without the sequence product.
    pub const fn reconciled() -> Self {
        InterpretationConfig {
            alpha_lead: AlphaLead::DeltaPowSigma,
            hbar: HbarForm::WOnly,
            u_exponent: UExponent::Product,
            ..Self::as_printed()
        }
    }

    /// Variants exercised by the prober: the typeset text, each single-flag
    /// departure from it, and the reconciled reading.
    pub fn probe_variants() -> Vec<(String, Self)> {
        let p = Self::as_printed();
        vec![
            ("as-printed".into(), p),
            ("u-times-t".into(), Self { u_exponent: UExponent::Product, ..p }),
            ("alpha-delta-pow".into(), Self { alpha_lead: AlphaLead::DeltaPowSigma, ..p }),
            ("hbar-w-only".into(), Self { hbar: HbarForm::WOnly, ..p }),
            ("t-superscript".into(), Self { t_placement: TPlacement::Superscript, ..p }),
            ("s6-inverted".into(), Self { loop_polarity: LoopPolarity::Inverted, ..p }),
            ("exp-mod-m".into(), Self { exponent_modulus: ExponentModulus::Modulus, ..p }),
            ("g0-direct".into(), Self { g0_sign: G0Sign::Direct, ..p }),
            ("w-gcd-order".into(), Self { w_condition: WCondition::GroupOrder, ..p }),
            ("reconciled".into(), Self::reconciled()),
            (
                "reconciled-s6-inverted".into(),
                Self { loop_polarity: LoopPolarity::Inverted, ..Self::reconciled() },
            ),
        ]
    }

    /// The typeset text each flag disambiguates.
    pub fn ledger() -> &'static [(&'static str, &'static str)] {
        &[
            ("w-gcd", "S3: gcd(W, d̄D̄) > 1"),
            ("t-place", "S4: α ← δ^((σ̄ + δW^(σ̄-1))T), β ← δ^(W^(σ̄T))"),
            ("alpha-lead", "S4: α ← δ^((σ̄ + δW^(σ̄-1))T)"),
            ("hbar", "S4: h̄ ← (W ∏ A_i)^(-δS) (αδ^-1) % M"),
            ("u-exp", "verify S3: X ← (αQ^-1)^(QU^T) α^(Q^σ̄) % M"),
            ("s6", "sign S6: if d̄ ∤ ((WQ)^(σ̄-1) + ξ̄ + rUS) % M̄ then go to S5 else end"),
            ("exp-mod", "every exponent without an explicit % M̄"),
            ("g0", "sign S2: G_0 ← (∏ A_i^(-b_i))^δ % M"),
            ("e-budget", "keygen S2: ∏ e_i ≈ 2^8 and p_k < p_(n/2)"),
        ]
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = || format!("unknown value {value:?} for {key}");
        match key {
            "w-gcd" => {
                self.w_condition = match value {
                    "dD" => WCondition::SmallDivisors,
                    "order" => WCondition::GroupOrder,
                    _ => return Err(bad()),
                }
            }
            "t-place" => {
                self.t_placement = match value {
                    "mul" => TPlacement::Multiplier,
                    "sup" => TPlacement::Superscript,
                    _ => return Err(bad()),
                }
            }
            "alpha-lead" => {
                self.alpha_lead = match value {
                    "sigma" => AlphaLead::Sigma,
                    "delta-pow" => AlphaLead::DeltaPowSigma,
                    _ => return Err(bad()),
                }
            }
            "hbar" => {
                self.hbar = match value {
                    "with-seq" => HbarForm::WithSequence,
                    "w-only" => HbarForm::WOnly,
                    _ => return Err(bad()),
                }
            }
            "u-exp" => {
                self.u_exponent = match value {
                    "pow" => UExponent::Power,
                    "mul" => UExponent::Product,
                    _ => return Err(bad()),
                }
            }
            "s6" => {
                self.loop_polarity = match value {
                    "printed" => LoopPolarity::AsPrinted,
                    "inverted" => LoopPolarity::Inverted,
                    _ => return Err(bad()),
                }
            }
            "exp-mod" => {
                self.exponent_modulus = match value {
                    "order" => ExponentModulus::GroupOrder,
                    "m" => ExponentModulus::Modulus,
                    _ => return Err(bad()),
                }
            }
            "g0" => {
                self.g0_sign = match value {
                    "inverse" => G0Sign::Inverse,
                    "direct" => G0Sign::Direct,
                    _ => return Err(bad()),
                }
            }
            "e-budget" => {
                self.exponent_budget = match value {
                    "relaxed" => ExponentBudget::Relaxed,
                    "strict" => ExponentBudget::Strict,
                    _ => return Err(bad()),
                }
            }
            _ => return Err(format!("unknown interpretation flag {key:?}")),
        }
        Ok(())
    }
}

impl fmt::Display for InterpretationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "w-gcd={},t-place={},alpha-lead={},hbar={},u-exp={},s6={},exp-mod={},g0={},e-budget={}",
            match self.w_condition {
                WCondition::SmallDivisors => "dD",
                WCondition::GroupOrder => "order",
            },
            match self.t_placement {
                TPlacement::Multiplier => "mul",
                TPlacement::Superscript => "sup",
            },
            match self.alpha_lead {
                AlphaLead::Sigma => "sigma",
                AlphaLead::DeltaPowSigma => "delta-pow",
            },
            match self.hbar {
                HbarForm::WithSequence => "with-seq",
                HbarForm::WOnly => "w-only",
            },
            match self.u_exponent {
                UExponent::Power => "pow",
                UExponent::Product => "mul",
            },
            match self.loop_polarity {
                LoopPolarity::AsPrinted => "printed",
                LoopPolarity::Inverted => "inverted",
            },
            match self.exponent_modulus {
                ExponentModulus::GroupOrder => "order",
                ExponentModulus::Modulus => "m",
            },
            match self.g0_sign {
                G0Sign::Inverse => "inverse",
                G0Sign::Direct => "direct",
            },
            match self.exponent_budget {
                ExponentBudget::Relaxed => "relaxed",
                ExponentBudget::Strict => "strict",
            },
        )
    }
}

/// Accepts `printed`, `reconciled`, or a comma list of `flag=value`
/// overrides applied to the typeset reading (optionally prefixed by a
/// preset, e.g. `reconciled,s6=inverted`).
impl FromStr for InterpretationConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = Self::as_printed();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "printed" | "as-printed" => cfg = Self::as_printed(),
                "reconciled" => cfg = Self::reconciled(),
                kv => {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| format!("expected flag=value, got {kv:?}"))?;
                    cfg.set(k, v)?;
                }
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parses_back() {
        for (_, v) in InterpretationConfig::probe_variants() {
            assert_eq!(v.to_string().parse::<InterpretationConfig>().unwrap(), v);
        }
        assert_eq!("reconciled".parse::<InterpretationConfig>().unwrap(), InterpretationConfig::reconciled());
        assert!("u-exp=cube".parse::<InterpretationConfig>().is_err());
        assert!("nonsense".parse::<InterpretationConfig>().is_err());
    }

    #[test]
    fn every_flag_is_documented() {
        let shown = InterpretationConfig::as_printed().to_string();
        for (key, text) in InterpretationConfig::ledger() {
            assert!(shown.contains(&format!("{key}=")), "{key}");
            assert!(!text.is_empty());
        }
    }
}
