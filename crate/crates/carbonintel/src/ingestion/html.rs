//! Hand-rolled parser for the HTML subset the ingestion layer accepts:
//! headings, paragraphs, list items, and tables. The first heading becomes
//! the document title; the text of other block elements becomes paragraphs.
//! Text outside block elements, scripts, and styles is ignored.

use crate::core::Table;
use crate::ingestion::parse::type_cell;

#[derive(Debug)]
pub(crate) struct HtmlDoc {
    pub title: Option<String>,
    pub paragraphs: Vec<String>,
    pub tables: Vec<Table>,
}

#[derive(Debug)]
pub(crate) struct HtmlError {
    pub position: usize,
    pub detail: String,
}

pub(crate) fn parse_html(input: &str) -> Result<HtmlDoc, HtmlError> {
    let bytes = input.as_bytes();
    let mut pos = 0usize;

    let mut title: Option<String> = None;
    let mut paragraphs = Vec::new();
    let mut tables = Vec::new();

    // One flat text buffer is enough: block elements in this subset are
    // treated as non-nesting text containers.
    let mut text_buf = String::new();
    let mut in_block = false;
    let mut block_is_heading = false;
    let mut skip_until: Option<&'static str> = None;

    let mut table_builder: Option<TableBuilder> = None;

    while pos < bytes.len() {
        if bytes[pos] == b'<' {
            if input[pos..].starts_with("<!--") {
                match input[pos..].find("-->") {
                    Some(rel) => pos += rel + 3,
                    None => {
                        return Err(HtmlError {
                            position: pos,
                            detail: "unterminated comment".into(),
                        });
                    }
                }
                continue;
            }
            if input[pos..].starts_with("<!") {
                match input[pos..].find('>') {
                    Some(rel) => pos += rel + 1,
                    None => {
                        return Err(HtmlError {
                            position: pos,
                            detail: "unterminated declaration".into(),
                        });
                    }
                }
                continue;
            }
            let tag_start = pos;
            let (tag, after) = read_tag(input, pos).ok_or_else(|| HtmlError {
                position: tag_start,
                detail: "unterminated tag".into(),
            })?;
            pos = after;

            if let Some(awaited) = skip_until {
                if tag.closing && tag.name == awaited {
                    skip_until = None;
                }
                continue;
            }

            match (tag.name.as_str(), tag.closing) {
                ("script", false) => skip_until = Some("script"),
                ("style", false) => skip_until = Some("style"),
                ("table", false) => {
                    if table_builder.is_some() {
                        return Err(HtmlError {
                            position: tag_start,
                            detail: "nested table".into(),
                        });
                    }
                    table_builder = Some(TableBuilder::new(tag_start));
                }
                ("table", true) => {
                    let builder = table_builder.take().ok_or_else(|| HtmlError {
                        position: tag_start,
                        detail: "close of table that was never opened".into(),
                    })?;
                    tables.push(builder.finish()?);
                }
                ("tr", false) => {
                    if let Some(b) = table_builder.as_mut() {
                        b.start_row();
                    }
                }
                ("th" | "td", false) => {
                    if let Some(b) = table_builder.as_mut() {
                        b.start_cell();
                    }
                }
                ("th" | "td", true) => {
                    if let Some(b) = table_builder.as_mut() {
                        b.end_cell();
                    }
                }
                ("tr", true) => {
                    if let Some(b) = table_builder.as_mut() {
                        b.end_row();
                    }
                }
                ("h1" | "h2" | "h3" | "h4" | "h5" | "h6", false) => {
                    in_block = true;
                    block_is_heading = true;
                    text_buf.clear();
                }
                ("p" | "li", false) => {
                    in_block = true;
                    block_is_heading = false;
                    text_buf.clear();
                }
                ("h1" | "h2" | "h3" | "h4" | "h5" | "h6" | "p" | "li", true) => {
                    let text = collapse_whitespace(&text_buf);
                    if !text.is_empty() {
                        if block_is_heading && title.is_none() {
                            title = Some(text);
                        } else {
                            paragraphs.push(text);
                        }
                    }
                    in_block = false;
                    text_buf.clear();
                }
                ("br", _) => {
                    if in_block {
                        text_buf.push(' ');
                    }
                }
                _ => {}
            }
            continue;
        }

        let chunk_end = input[pos..]
            .find('<')
            .map(|rel| pos + rel)
            .unwrap_or(input.len());
        let chunk = &input[pos..chunk_end];
        if skip_until.is_none() {
            if let Some(b) = table_builder.as_mut() {
                b.push_text(&decode_entities(chunk));
            } else if in_block {
                text_buf.push_str(&decode_entities(chunk));
            }
        }
        pos = chunk_end;
    }

    if let Some(b) = table_builder {
        return Err(HtmlError {
            position: b.opened_at,
            detail: "unclosed table".into(),
        });
    }

    Ok(HtmlDoc {
        title,
        paragraphs,
        tables,
    })
}

struct ParsedTag {
    name: String,
    closing: bool,
}

/// Read one tag starting at `pos` (which points at '<'); returns the tag and
/// the offset just past its '>'. Attribute values may contain '>' inside
/// quotes. Returns None when input ends before the tag closes.
fn read_tag(input: &str, pos: usize) -> Option<(ParsedTag, usize)> {
    let bytes = input.as_bytes();
    let mut i = pos + 1;
    let closing = bytes.get(i) == Some(&b'/');
    if closing {
        i += 1;
    }
    let name_start = i;
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric()) {
        i += 1;
    }
    let name = input[name_start..i].to_ascii_lowercase();
    let mut quote: Option<u8> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) => {
                if b == q {
                    quote = None;
                }
            }
            None => match b {
                b'"' | b'\'' => quote = Some(b),
                b'>' => return Some((ParsedTag { name, closing }, i + 1)),
                _ => {}
            },
        }
        i += 1;
    }
    None
}

struct TableBuilder {
    opened_at: usize,
    rows: Vec<Vec<String>>,
    current_row: Option<Vec<String>>,
    current_cell: Option<String>,
}

impl TableBuilder {
    fn new(opened_at: usize) -> Self {
        TableBuilder {
            opened_at,
            rows: Vec::new(),
            current_row: None,
            current_cell: None,
        }
    }

    fn start_row(&mut self) {
        self.end_row();
        self.current_row = Some(Vec::new());
    }

    fn end_row(&mut self) {
        self.end_cell();
        if let Some(row) = self.current_row.take() {
            if !row.is_empty() {
                self.rows.push(row);
            }
        }
    }

    fn start_cell(&mut self) {
        self.end_cell();
        self.current_cell = Some(String::new());
    }

    fn end_cell(&mut self) {
        if let Some(cell) = self.current_cell.take() {
            if let Some(row) = self.current_row.as_mut() {
                row.push(collapse_whitespace(&cell));
            }
        }
    }

    fn push_text(&mut self, text: &str) {
        if let Some(cell) = self.current_cell.as_mut() {
            cell.push_str(text);
        }
    }

    fn finish(mut self) -> Result<Table, HtmlError> {
        self.end_row();
        if self.rows.is_empty() {
            return Err(HtmlError {
                position: self.opened_at,
                detail: "table has no rows".into(),
            });
        }
        let headers = self.rows.remove(0);
        let rows = self
            .rows
            .into_iter()
            .map(|row| row.iter().map(|c| type_cell(c)).collect())
            .collect();
        let table = Table { headers, rows };
        table.validate().map_err(|e| HtmlError {
            position: self.opened_at,
            detail: e.to_string(),
        })?;
        Ok(table)
    }
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('&') {
        out.push_str(&rest[..start]);
        let tail = &rest[start..];
        let semi = tail.find(';').filter(|&i| i <= 10);
        match semi {
            Some(end) => {
                let entity = &tail[1..end];
                match decode_entity(entity) {
                    Some(ch) => out.push(ch),
                    None => out.push_str(&tail[..=end]),
                }
                rest = &tail[end + 1..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entity(entity: &str) -> Option<char> {
    match entity {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        _ => {
            let code = entity.strip_prefix('#')?;
            let value = if let Some(hex) = code.strip_prefix(['x', 'X']) {
                u32::from_str_radix(hex, 16).ok()?
            } else {
                code.parse::<u32>().ok()?
            };
            char::from_u32(value)
        }
    }
}
