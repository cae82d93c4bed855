use std::collections::BTreeMap;

use super::{SentenceRecord, Token};
use crate::{Error, Result};

/// Parses CoNLL-U text: ten tab-separated columns per word line, blank
/// lines between sentences, `#` comments. Multiword ranges (`3-4`) and
/// empty nodes (`5.1`) are skipped. `# sent_id` and `# text` are honoured.
pub fn parse_conllu(text: &str) -> Result<Vec<SentenceRecord>> {
    let mut out = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut raw = String::new();

    let mut flush = |tokens: &mut Vec<Token>, sent_id: &mut Option<String>, raw: &mut String| {
        if tokens.is_empty() {
            return;
        }
        let n = out.len() + 1;
        out.push(SentenceRecord {
            id: sent_id.take().unwrap_or_else(|| format!("s{n}")),
            tokens: std::mem::take(tokens),
            raw_text: std::mem::take(raw),
        });
    };

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut sent_id, &mut raw);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => sent_id = Some(value.trim().to_string()),
                    "text" => raw = value.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::format(
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        if id.parse::<u32>().is_err() {
            return Err(Error::format(lineno, format!("invalid token id `{id}`")));
        }
        tokens.push(Token {
            surface: cols[1].to_string(),
            lemma: if cols[2] == "_" { String::new() } else { cols[2].to_string() },
            pos: if cols[3] == "_" { String::new() } else { cols[3].to_string() },
            morph: parse_feats(cols[5]).map_err(|m| Error::format(lineno, m))?,
            deprel: (cols[7] != "_").then(|| cols[7].to_string()),
        });
    }
    flush(&mut tokens, &mut sent_id, &mut raw);
    Ok(out)
}

fn parse_feats(s: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut feats = BTreeMap::new();
    if s == "_" || s.is_empty() {
        return Ok(feats);
    }
    for kv in s.split('|') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("malformed feature `{kv}`"))?;
        feats.insert(k.to_string(), v.to_string());
    }
    Ok(feats)
}
