//! Just enough HTTP/1.1 framing for XML-RPC: a header block followed by a
//! `Content-Length` body.

use std::io::{self, BufRead, Read};

pub(crate) const MAX_HEAD: usize = 64 * 1024;

#[derive(Debug)]
pub(crate) struct Head {
    pub start_line: String,
    pub headers: Vec<(String, String)>,
}

impl Head {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn content_length(&self) -> Result<Option<usize>, String> {
        match self.header("content-length") {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| format!("bad Content-Length `{v}`")),
        }
    }

    pub fn is_chunked(&self) -> bool {
        self.header("transfer-encoding")
            .is_some_and(|v| v.to_ascii_lowercase().contains("chunked"))
    }
}

pub(crate) enum HeadError {
    Io(io::Error),
    /// Connection closed before any byte arrived.
    Closed,
    Malformed(String),
}

impl From<io::Error> for HeadError {
    fn from(e: io::Error) -> Self {
        HeadError::Io(e)
    }
}

pub(crate) fn read_head<R: BufRead>(reader: &mut R) -> Result<Head, HeadError> {
    let mut total = 0usize;
    let mut lines = Vec::new();
    loop {
        let mut line = String::new();
        let n = reader.read_line(&mut line)?;
        if n == 0 {
            return Err(if total == 0 {
                HeadError::Closed
            } else {
                HeadError::Malformed("connection closed inside headers".into())
            });
        }
        total += n;
        if total > MAX_HEAD {
            return Err(HeadError::Malformed("header block too large".into()));
        }
        let line = line.trim_end_matches(['\r', '\n']).to_string();
        if line.is_empty() {
            if lines.is_empty() {
                continue;
            }
            break;
        }
        lines.push(line);
    }
    let start_line = lines.remove(0);
    let headers = lines
        .into_iter()
        .map(|l| match l.split_once(':') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(HeadError::Malformed(format!("bad header line `{l}`"))),
        })
        .collect::<Result<_, _>>()?;
    Ok(Head { start_line, headers })
}

pub(crate) fn read_body<R: Read>(reader: &mut R, len: usize) -> io::Result<Vec<u8>> {
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body)?;
    Ok(body)
}
