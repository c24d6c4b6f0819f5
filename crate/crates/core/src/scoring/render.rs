use serde::{Deserialize, Serialize};

use super::Discourse;

/// How `$` is realized for a text model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EotRealization {
    /// Ask the service to append its end-of-sequence token.
    EosToken,
    /// Append this text verbatim.
    Literal(String),
}

/// Token counting used to size pause padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenCounter {
    #[default]
    Bytes,
    Chars,
    Words,
}

impl TokenCounter {
    pub fn count(&self, text: &str) -> usize {
        match self {
            TokenCounter::Bytes => text.len(),
            TokenCounter::Chars => text.chars().count(),
            TokenCounter::Words => text.split_whitespace().count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderConfig {
    #[serde(default = "default_separator")]
    pub separator: String,
    #[serde(default = "default_eot")]
    pub eot_realization: EotRealization,
    #[serde(default = "default_group")]
    pub whitespace_group_size: usize,
    #[serde(default)]
    pub token_counter: TokenCounter,
}

fn default_separator() -> String {
    " ".into()
}

fn default_eot() -> EotRealization {
    EotRealization::EosToken
}

fn default_group() -> usize {
    16
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            separator: default_separator(),
            eot_realization: default_eot(),
            whitespace_group_size: default_group(),
            token_counter: TokenCounter::default(),
        }
    }
}

fn pause_padding(a: &str, n_equivalent: usize, group: usize, count_tokens: &dyn Fn(&str) -> usize) -> String {
    let extra_tokens = n_equivalent.saturating_sub(1) * count_tokens(a);
    " ".repeat(group * extra_tokens)
}

/// Renders `a b` with whitespace after `a` worth the tokens that `a^n b` would add.
pub fn pause_token_transform(
    a: &str,
    b: &str,
    n_equivalent: usize,
    cfg: &RenderConfig,
    count_tokens: &dyn Fn(&str) -> usize,
) -> String {
    let pad = pause_padding(a, n_equivalent, cfg.whitespace_group_size, count_tokens);
    format!("{a}{pad}{}{b}", cfg.separator)
}

impl RenderConfig {
    /// Text plus whether the service should append its EOS token.
    pub fn render(&self, d: &Discourse) -> (String, bool) {
        let counter = self.token_counter;
        let count = move |s: &str| counter.count(s);
        let mut text = String::new();
        for (i, unit) in d.units.iter().enumerate() {
            if i > 0 {
                text.push_str(&self.separator);
            }
            text.push_str(unit);
            if i == 0 && d.pause_reps > 1 {
                text.push_str(&pause_padding(
                    unit,
                    d.pause_reps,
                    self.whitespace_group_size,
                    &count,
                ));
            }
        }
        if !d.terminated {
            return (text, false);
        }
        match &self.eot_realization {
            EotRealization::EosToken => (text, true),
            EotRealization::Literal(marker) => {
                text.push_str(marker);
                (text, false)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pause_sizes() {
        let cfg = RenderConfig::default();
        let words = |s: &str| s.split_whitespace().count();
        assert_eq!(pause_token_transform("a b", "c", 1, &cfg, &words), "a b c");
        // t = 2 tokens, n = 3, group 16 -> 64 spaces
        let out = pause_token_transform("a b", "c", 3, &cfg, &words);
        assert_eq!(out, format!("a b{} c", " ".repeat(64)));
        let unit = RenderConfig {
            whitespace_group_size: 1,
            ..RenderConfig::default()
        };
        let out = pause_token_transform("a b", "c", 2, &unit, &words);
        assert_eq!(out, format!("a b{} c", " ".repeat(2)));
    }

    #[test]
    fn rendering_conventions() {
        let cfg = RenderConfig::default();
        let xy = Discourse::repeated("A.", 1, Some("B."));
        assert_eq!(cfg.render(&xy), ("A. B.".to_string(), false));
        let xe = Discourse::repeated("A.", 1, None);
        assert_eq!(cfg.render(&xe), ("A.".to_string(), true));
        let lit = RenderConfig {
            eot_realization: EotRealization::Literal("\n".into()),
            ..RenderConfig::default()
        };
        assert_eq!(lit.render(&xe), ("A.\n".to_string(), false));
        let paused = Discourse::paused("AB", 2, Some("C"));
        let bytes = RenderConfig {
            whitespace_group_size: 1,
            ..RenderConfig::default()
        };
        assert_eq!(bytes.render(&paused).0, "AB   C");
    }
}
