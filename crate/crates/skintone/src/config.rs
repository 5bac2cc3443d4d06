//! Run settings and the `key = value` configuration format.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Intervals are written `lo,hi` and the type cutoffs as five
//! comma-separated degrees. Later assignments win, so a file is applied
//! first, then `--set key=value` pairs, then dedicated flags.
//!
//! | key | default |
//! |-----|---------|
//! | `thresholds` | `55,41,28,19,10` |
//! | `side` | `200` |
//! | `patch_size` | `20` |
//! | `min_usable_fraction` | `0.25` |
//! | `hsv.hue`, `hsv.saturation`, `hsv.value` | `0,25` / `0.06,0.67` / `0.16,1` |
//! | `ycrcb.y`, `ycrcb.cr`, `ycrcb.cb` | `0,255` / `135,180` / `85,135` |
//! | `blackhat.kernel`, `blackhat.threshold` | `17` / `10` |
//! | `ght.nu`, `ght.tau`, `ght.kappa`, `ght.omega` | `1e10` / `0.01` / `0` / `0.5` |
//! | `ght.aggregation` | `median` |
//! | `seed` | `0` |
//! | `dark_cutoff` | `28` |
//! | `split.ratios` | `0.57,0.14,0.29` |
//! | `split.cutoff` | `41` |

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use skintone_core::colorspace::SkinTypeThresholds;
use skintone_core::estimators::{EstimatorConfig, Interval};
use skintone_core::splits::SplitRatios;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub estimator: EstimatorConfig,
    pub seed: u64,
    pub dark_cutoff: f64,
    pub split_ratios: SplitRatios,
    pub split_cutoff: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            seed: 0,
            dark_cutoff: 28.0,
            split_ratios: SplitRatios::BASELINE,
            split_cutoff: 41.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn parse_list<const N: usize>(key: &str, value: &str) -> std::result::Result<[f64; N], String> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != N {
        return Err(format!("`{key}` takes {N} comma-separated numbers"));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = parse(key, p)?;
    }
    Ok(out)
}

fn parse_interval(key: &str, value: &str) -> std::result::Result<Interval, String> {
    let [lo, hi] = parse_list::<2>(key, value)?;
    Ok(Interval::new(lo, hi))
}

fn fmt_interval(i: Interval) -> String {
    format!("{},{}", i.lo, i.hi)
}

impl Settings {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let e = &mut self.estimator;
        let value = value.trim();
        match key.trim() {
            "thresholds" => {
                e.thresholds = SkinTypeThresholds::new(parse_list::<5>(key, value)?)
                    .map_err(|err| format!("`thresholds`: {err}"))?
            }
            "side" => e.side = parse(key, value)?,
            "patch_size" => e.patch_size = parse(key, value)?,
            "min_usable_fraction" => e.min_usable_fraction = parse(key, value)?,
            "hsv.hue" => e.hsv_gate.hue = parse_interval(key, value)?,
            "hsv.saturation" => e.hsv_gate.saturation = parse_interval(key, value)?,
            "hsv.value" => e.hsv_gate.value = parse_interval(key, value)?,
            "ycrcb.y" => e.ycrcb_gate.y = parse_interval(key, value)?,
            "ycrcb.cr" => e.ycrcb_gate.cr = parse_interval(key, value)?,
            "ycrcb.cb" => e.ycrcb_gate.cb = parse_interval(key, value)?,
            "blackhat.kernel" => e.blackhat_kernel = parse(key, value)?,
            "blackhat.threshold" => e.blackhat_threshold = parse(key, value)?,
            "ght.nu" => e.ght.nu = parse(key, value)?,
            "ght.tau" => e.ght.tau = parse(key, value)?,
            "ght.kappa" => e.ght.kappa = parse(key, value)?,
            "ght.omega" => e.ght.omega = parse(key, value)?,
            "ght.aggregation" => e.ght_aggregation = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "dark_cutoff" => self.dark_cutoff = parse(key, value)?,
            "split.ratios" => {
                let [train, val, test] = parse_list::<3>(key, value)?;
                self.split_ratios = SplitRatios::new(train, val, test)
                    .map_err(|err| format!("`split.ratios`: {err}"))?
            }
            "split.cutoff" => self.split_cutoff = parse(key, value)?,
            other => return Err(format!("unknown setting `{other}`")),
        }
        Ok(())
    }

    /// Applies a `key=value` pair as given on the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected key=value, got `{pair}`")))?;
        self.set(k, v).map_err(Error::Usage)
    }

    pub fn apply_text(&mut self, path: &Path, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let line_no = Some(i as u64 + 1);
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, line_no, "expected `key = value`"))?;
            self.set(k, v).map_err(|m| Error::parse(path, line_no, m))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(path, &text)
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator
            .validate()
            .map_err(|e| Error::Usage(format!("invalid configuration: {e}")))?;
        for (name, v) in [
            ("dark_cutoff", self.dark_cutoff),
            ("split.cutoff", self.split_cutoff),
        ] {
            if !v.is_finite() {
                return Err(Error::Usage(format!("`{name}` must be finite")));
            }
        }
        Ok(())
    }

    /// Every setting as `key = value`, one per line, in a fixed order.
    pub fn render(&self) -> String {
        let e = &self.estimator;
        let c = e.thresholds.cutoffs();
        let r = self.split_ratios;
        let entries = [
            (
                "thresholds",
                format!("{},{},{},{},{}", c[0], c[1], c[2], c[3], c[4]),
            ),
            ("side", e.side.to_string()),
            ("patch_size", e.patch_size.to_string()),
            ("min_usable_fraction", e.min_usable_fraction.to_string()),
            ("hsv.hue", fmt_interval(e.hsv_gate.hue)),
            ("hsv.saturation", fmt_interval(e.hsv_gate.saturation)),
            ("hsv.value", fmt_interval(e.hsv_gate.value)),
            ("ycrcb.y", fmt_interval(e.ycrcb_gate.y)),
            ("ycrcb.cr", fmt_interval(e.ycrcb_gate.cr)),
            ("ycrcb.cb", fmt_interval(e.ycrcb_gate.cb)),
            ("blackhat.kernel", e.blackhat_kernel.to_string()),
            ("blackhat.threshold", e.blackhat_threshold.to_string()),
            ("ght.nu", format!("{:e}", e.ght.nu)),
            ("ght.tau", e.ght.tau.to_string()),
            ("ght.kappa", e.ght.kappa.to_string()),
            ("ght.omega", e.ght.omega.to_string()),
            ("ght.aggregation", e.ght_aggregation.as_str().to_string()),
            ("seed", self.seed.to_string()),
            ("dark_cutoff", self.dark_cutoff.to_string()),
            ("split.ratios", format!("{},{},{}", r.train, r.val, r.test)),
            ("split.cutoff", self.split_cutoff.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Hex SHA-256 of the rendered default settings.
pub fn default_config_hash() -> String {
    let digest = Sha256::digest(Settings::default().render().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use skintone_core::estimators::Aggregation;

    #[test]
    fn render_round_trips() {
        let mut s = Settings::default();
        s.set("ght.tau", "0.5").unwrap();
        s.set("hsv.hue", "2, 30").unwrap();
        s.set("ght.aggregation", "mean").unwrap();
        s.set("split.ratios", "0.6,0.2,0.2").unwrap();
        let mut back = Settings::default();
        back.apply_text(Path::new("x"), &s.render()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.estimator.ght_aggregation, Aggregation::Mean);
    }

    #[test]
    fn file_errors_name_the_line() {
        let mut s = Settings::default();
        let err = s
            .apply_text(Path::new("run.cfg"), "# c\nside = 100\nbogus = 1\n")
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("run.cfg, line 3") && err.contains("bogus"),
            "{err}"
        );
        assert_eq!(s.estimator.side, 100);
        assert!(s.apply_text(Path::new("r"), "side 3").is_err());
        assert!(s.set("thresholds", "10,20,30,40,50").is_err());
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = default_config_hash();
        assert_eq!(h.len(), 64);
        assert_eq!(h, default_config_hash());
    }
}
