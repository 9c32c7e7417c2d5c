use std::io::{BufReader, ErrorKind, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use thiserror::Error;
use url::Url;

use crate::codec::{decode_response, encode_call};
use crate::error::{CodecError, TransportError};
use crate::http::{read_body, read_head, HeadError};
use crate::value::{Fault, MethodCall, MethodResponse, Value};

#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub connect_timeout: Duration,
    pub read_timeout: Duration,
    pub user_agent: String,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            connect_timeout: Duration::from_secs(30),
            read_timeout: Duration::from_secs(30),
            user_agent: concat!("rfim-xmlrpc/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

fn is_timeout(e: &std::io::Error) -> bool {
    matches!(e.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock)
}

/// POSTs `call` to `url` (`http://host:port[/path]`) and decodes the reply.
pub fn post_call(
    url: &str,
    call: &MethodCall,
    options: &ClientOptions,
) -> Result<MethodResponse, TransportError> {
    let parsed = Url::parse(url).map_err(|_| TransportError::Url(url.to_string()))?;
    if parsed.scheme() != "http" {
        return Err(TransportError::Url(url.to_string()));
    }
    let host = parsed.host_str().ok_or_else(|| TransportError::Url(url.to_string()))?;
    let port = parsed.port_or_known_default().unwrap_or(80);
    let authority = format!("{host}:{port}");
    let path = match parsed.path() {
        "" => "/",
        p => p,
    };

    let body = encode_call(call)?;

    let addrs: Vec<_> = (host.trim_start_matches('[').trim_end_matches(']'), port)
        .to_socket_addrs()
        .map_err(|source| TransportError::Connect { addr: authority.clone(), source })?
        .collect();
    let mut last_err = None;
    let mut stream = None;
    for addr in &addrs {
        match TcpStream::connect_timeout(addr, options.connect_timeout) {
            Ok(s) => {
                stream = Some(s);
                break;
            }
            Err(e) => last_err = Some(e),
        }
    }
    let mut stream = match stream {
        Some(s) => s,
        None => {
            let source = last_err
                .unwrap_or_else(|| std::io::Error::new(ErrorKind::NotFound, "no address resolved"));
            if is_timeout(&source) {
                return Err(TransportError::Timeout(authority));
            }
            return Err(TransportError::Connect { addr: authority, source });
        }
    };
    stream.set_read_timeout(Some(options.read_timeout))?;
    stream.set_write_timeout(Some(options.read_timeout))?;
    let _ = stream.set_nodelay(true);

    let mut request = format!(
        "POST {path} HTTP/1.1\r\nHost: {authority}\r\nUser-Agent: {}\r\n\
         Content-Type: text/xml\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        options.user_agent,
        body.len()
    )
    .into_bytes();
    request.extend_from_slice(&body);
    stream.write_all(&request).map_err(|e| io_error(e, &authority))?;

    let mut reader = BufReader::new(stream);
    let head = match read_head(&mut reader) {
        Ok(h) => h,
        Err(HeadError::Io(e)) => return Err(io_error(e, &authority)),
        Err(HeadError::Closed) => return Err(TransportError::Http("empty response".into())),
        Err(HeadError::Malformed(m)) => return Err(TransportError::Http(m)),
    };
    let mut parts = head.start_line.splitn(3, ' ');
    let version = parts.next().unwrap_or_default();
    if !version.starts_with("HTTP/1.") {
        return Err(TransportError::Http(format!("bad status line `{}`", head.start_line)));
    }
    let code: u16 = parts
        .next()
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| TransportError::Http(format!("bad status line `{}`", head.start_line)))?;
    let reason = parts.next().unwrap_or_default().to_string();
    if code >= 400 {
        return Err(TransportError::Status { code, reason });
    }
    if head.is_chunked() {
        return Err(TransportError::Http("chunked responses are not supported".into()));
    }
    let body = match head.content_length().map_err(TransportError::Http)? {
        Some(len) => read_body(&mut reader, len).map_err(|e| io_error(e, &authority))?,
        None => {
            let mut buf = Vec::new();
            reader.read_to_end(&mut buf).map_err(|e| io_error(e, &authority))?;
            buf
        }
    };
    Ok(decode_response(&body)?)
}

fn io_error(e: std::io::Error, authority: &str) -> TransportError {
    if is_timeout(&e) {
        TransportError::Timeout(authority.to_string())
    } else {
        TransportError::Io(e)
    }
}

#[derive(Debug, Error)]
pub enum CallError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("{0}")]
    Fault(Fault),
    #[error(transparent)]
    Encode(#[from] CodecError),
}

impl CallError {
    pub fn is_transport(&self) -> bool {
        matches!(self, CallError::Transport(_))
    }
}

/// Handle bound to one server URL.
#[derive(Debug, Clone)]
pub struct Client {
    url: String,
    options: ClientOptions,
}

impl Client {
    pub fn new(url: impl Into<String>) -> Self {
        Self::with_options(url, ClientOptions::default())
    }

    pub fn with_options(url: impl Into<String>, options: ClientOptions) -> Self {
        Client { url: url.into(), options }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn call(&self, method: &str, params: Vec<Value>) -> Result<Value, CallError> {
        let call = MethodCall::try_new(method, params)?;
        match post_call(&self.url, &call, &self.options)? {
            MethodResponse::Success(v) => Ok(v),
            MethodResponse::Fault(f) => Err(CallError::Fault(f)),
        }
    }
}
