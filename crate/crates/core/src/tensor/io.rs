use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};
use crate::field::{FieldDescriptor, FieldSpec};

/// On-disk form of a tensor: `{"field": ..., "dims": [...], "entries": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorFile {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    pub entries: Vec<u32>,
}

impl TensorFile {
    pub fn to_tensor(&self) -> Result<Tensor> {
        let fs = FieldSpec::from_descriptor(&self.field)?;
        Tensor::from_codes(&fs, self.dims.clone(), &self.entries)
    }
}

impl Tensor {
    pub fn to_file(&self) -> TensorFile {
        TensorFile {
            field: self.fs.descriptor(),
            dims: self.dims.clone(),
            entries: self.codes(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("tensor serializes")
    }

    /// Plain-text form accepted by [`parse_tensor`].
    pub fn to_text(&self) -> String {
        let mut s = self.fs.header_line();
        s.push_str("\ndims");
        for n in &self.dims {
            s.push_str(&format!(" {n}"));
        }
        s.push_str("\nentries");
        for c in self.codes() {
            s.push_str(&format!(" {c}"));
        }
        s.push('\n');
        s
    }
}

/// Reads a tensor from JSON or from the text layout
///
/// ```text
/// field p k [m_0 .. m_k]
/// dims n_1 .. n_d
/// entries c_1 c_2 ...
/// ```
///
/// where the entry list may continue over further lines.
pub(crate) fn num<T: std::str::FromStr>(tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("expected an integer, found {tok:?}")))
}

pub fn parse_tensor(input: &str) -> Result<Tensor> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') {
        let file: TensorFile =
            serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
        return file.to_tensor();
    }
    let mut field = None;
    let mut dims = None;
    let mut entries: Option<Vec<u32>> = None;
    for line in input.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap_or_default();
        match head {
            "field" => {
                let vals = toks.map(num::<u32>).collect::<Result<Vec<_>>>()?;
                field = Some(FieldSpec::from_header(&vals)?);
            }
            "dims" => dims = Some(toks.map(num::<usize>).collect::<Result<Vec<_>>>()?),
            "entries" => entries = Some(toks.map(num::<u32>).collect::<Result<Vec<_>>>()?),
            _ => match entries.as_mut() {
                Some(list) => {
                    for tok in line.split_whitespace() {
                        list.push(num(tok)?);
                    }
                }
                None => return Err(Error::Parse(format!("unexpected line {line:?}"))),
            },
        }
    }
    let fs = field.ok_or_else(|| Error::Parse("missing field line".into()))?;
    let dims = dims.ok_or_else(|| Error::Parse("missing dims line".into()))?;
    let entries = entries.ok_or_else(|| Error::Parse("missing entries line".into()))?;
    Tensor::from_codes(&fs, dims, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_text_roundtrip() {
        let fs = FieldSpec::of_order(4).unwrap();
        let t = Tensor::from_codes(&fs, vec![2, 1, 2], &[0, 1, 2, 3]).unwrap();
        assert_eq!(parse_tensor(&t.to_json()).unwrap(), t);
        assert_eq!(parse_tensor(&t.to_text()).unwrap(), t);
        assert_eq!(
            t.to_json(),
            r#"{"field":{"p":2,"deg":2,"modulus":[1,1,1]},"dims":[2,1,2],"entries":[0,1,2,3]}"#
        );
    }

    #[test]
    fn text_entries_may_wrap() {
        let t = parse_tensor("field 3 1\ndims 2 2\nentries 1 0\n 0 1\n").unwrap();
        assert_eq!(t.codes(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse_tensor("field 3 1\ndims 2 2\nentries 1 0 0\n").is_err());
        assert!(parse_tensor("field 3 1\ndims 2\nentries 1 3\n").is_err());
        assert!(parse_tensor("dims 2\nentries 1 0\n").is_err());
        assert!(parse_tensor(r#"{"field":{"p":4,"deg":1,"modulus":null},"dims":[1],"entries":[0]}"#).is_err());
    }
}
