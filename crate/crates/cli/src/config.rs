//! Flat `key = value` configuration.
//!
//! Each subcommand declares its keys once with [`settings!`], which produces
//! both the clap flags (all optional strings) and the typed config. Values
//! resolve as defaults, then the config file, then flags. Keys unknown to the
//! subcommand are rejected wherever they appear.

use std::fmt;
use std::path::Path;

use crate::CliError;

/// Parsed config file, keys normalised to their flag spelling.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: Vec<(usize, String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", i + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            entries.push((i + 1, key, value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// A value that can be written in a config file or passed as a flag.
pub trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
}

macro_rules! from_str_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.trim().parse().map_err(|e| format!("'{s}': {e}"))
            }
        }
    )*};
}

from_str_value!(f64, usize, u64, i64, bool, String);

impl<T: ConfigValue> ConfigValue for Option<T> {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s.trim() {
            "" | "none" => Ok(None),
            v => T::parse_value(v).map(Some),
        }
    }
}

/// Comma-separated list.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: ConfigValue> ConfigValue for List<T> {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(T::parse_value)
            .collect::<Result<_, _>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub trait Settings: Default {
    const KEYS: &'static [&'static str];
    fn set(&mut self, key: &str, value: &str) -> Result<(), String>;
}

pub trait Overrides {
    fn overrides(&self) -> Vec<(&'static str, String)>;
}

pub fn resolve<S: Settings>(
    file: Option<&ConfigFile>,
    flags: &impl Overrides,
) -> Result<S, CliError> {
    let mut cfg = S::default();
    if let Some(file) = file {
        for (line, key, value) in &file.entries {
            cfg.set(key, value)
                .map_err(|e| CliError::Usage(format!("config line {line}: {e}")))?;
        }
    }
    for (key, value) in flags.overrides() {
        cfg.set(key, &value)
            .map_err(|e| CliError::Usage(format!("--{key}: {e}")))?;
    }
    Ok(cfg)
}

/// `settings! { Args => Config { field "key": Type = default, "help"; ... } }`
macro_rules! settings {
    (
        $args:ident => $name:ident {
            $( $field:ident $key:literal : $ty:ty = $default:expr, $help:literal; )*
        }
    ) => {
        #[derive(Debug, Clone, Default, clap::Args)]
        pub struct $args {
            $(
                #[arg(long = $key, value_name = "VALUE", help = $help)]
                pub $field: Option<String>,
            )*
        }

        impl $crate::config::Overrides for $args {
            fn overrides(&self) -> ::std::vec::Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $( if let Some(v) = &self.$field { out.push(($key, v.clone())); } )*
                out
            }
        }

        #[derive(Debug, Clone, serde::Serialize)]
        pub struct $name {
            $( #[serde(rename = $key)] pub $field: $ty, )*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl $crate::config::Settings for $name {
            const KEYS: &'static [&'static str] = &[$($key),*];

            fn set(&mut self, key: &str, value: &str) -> ::std::result::Result<(), String> {
                match key {
                    $( $key => {
                        self.$field = <$ty as $crate::config::ConfigValue>::parse_value(value)
                            .map_err(|e| format!("{}: {}", $key, e))?;
                    } )*
                    _ => return Err(format!(
                        "unknown key '{}' (expected one of: {})",
                        key,
                        <Self as $crate::config::Settings>::KEYS.join(", ")
                    )),
                }
                Ok(())
            }
        }
    };
}

pub(crate) use settings;

#[cfg(test)]
mod tests {
    use super::*;

    settings! {
        DemoArgs => Demo {
            modes "K": usize = 64, "truncation";
            dt "dt": f64 = 1e-3, "step";
            ladder "amplitude-ladder": List<f64> = List(vec![1e-2, 1e-3]), "ladder";
            period "T": Option<f64> = None, "period";
        }
    }

    #[test]
    fn precedence_and_unknown_keys() {
        let file = ConfigFile::parse("# comment\nK = 32\ndt=2e-3  # trailing\namplitude_ladder = 3e-2, 3e-3\n").unwrap();
        let flags = DemoArgs {
            dt: Some("5e-4".into()),
            ..Default::default()
        };
        let cfg: Demo = resolve(Some(&file), &flags).unwrap();
        assert_eq!(cfg.modes, 32);
        assert_eq!(cfg.dt, 5e-4);
        assert_eq!(cfg.ladder, List(vec![3e-2, 3e-3]));
        assert_eq!(cfg.period, None);

        let bad = ConfigFile::parse("frobnicate = 1").unwrap();
        let err = resolve::<Demo>(Some(&bad), &DemoArgs::default()).unwrap_err();
        assert!(err.to_string().contains("unknown key 'frobnicate'"));
        assert!(ConfigFile::parse("no equals sign").is_err());
        let flags = DemoArgs {
            modes: Some("many".into()),
            ..Default::default()
        };
        assert!(resolve::<Demo>(None, &flags).is_err());
    }

    #[test]
    fn defaults_without_file() {
        let cfg: Demo = resolve(None, &DemoArgs::default()).unwrap();
        assert_eq!((cfg.modes, cfg.dt), (64, 1e-3));
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(json, r#"{"K":64,"dt":0.001,"amplitude-ladder":[0.01,0.001],"T":null}"#);
    }
}
