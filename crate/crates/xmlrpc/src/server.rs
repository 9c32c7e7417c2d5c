use std::fs;
use std::io::{self, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, warn};

use crate::codec::{decode_call, encode_response};
use crate::http::{read_body, read_head, HeadError};
use crate::value::{Fault, MethodCall, MethodResponse};

/// Serves XML-RPC calls. Called concurrently from connection threads.
pub trait Handler: Send + Sync {
    fn handle(&self, call: MethodCall) -> MethodResponse;
}

impl<F> Handler for F
where
    F: Fn(MethodCall) -> MethodResponse + Send + Sync,
{
    fn handle(&self, call: MethodCall) -> MethodResponse {
        self(call)
    }
}

#[derive(Debug, Clone)]
pub struct ServerOptions {
    /// Answer with permissive `Access-Control-Allow-*` headers and accept
    /// `OPTIONS` preflights.
    pub cors: bool,
    /// Directory served read-only under `/ui/`.
    pub static_dir: Option<PathBuf>,
    pub max_body: usize,
    pub read_timeout: Duration,
}

impl Default for ServerOptions {
    fn default() -> Self {
        ServerOptions {
            cors: false,
            static_dir: None,
            max_body: 64 * 1024 * 1024,
            read_timeout: Duration::from_secs(30),
        }
    }
}

pub struct Server {
    listener: TcpListener,
    handler: Arc<dyn Handler>,
    options: Arc<ServerOptions>,
}

impl Server {
    pub fn bind(
        addr: impl ToSocketAddrs,
        handler: Arc<dyn Handler>,
        options: ServerOptions,
    ) -> io::Result<Server> {
        let listener = TcpListener::bind(addr)?;
        Ok(Server { listener, handler, options: Arc::new(options) })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Blocks accepting connections until the process exits.
    pub fn serve_forever(self) -> io::Result<()> {
        let stop = Arc::new(AtomicBool::new(false));
        self.accept_loop(&stop);
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let thread = thread::Builder::new()
            .name("xmlrpc-accept".into())
            .spawn(move || self.accept_loop(&flag))?;
        Ok(ServerHandle { addr, stop, thread: Some(thread) })
    }

    fn accept_loop(&self, stop: &AtomicBool) {
        for conn in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let handler = Arc::clone(&self.handler);
            let options = Arc::clone(&self.options);
            let spawned = thread::Builder::new()
                .name("xmlrpc-conn".into())
                .spawn(move || {
                    if let Err(e) = serve_connection(stream, handler.as_ref(), &options) {
                        debug!("connection error: {e}");
                    }
                });
            if let Err(e) = spawned {
                warn!("cannot spawn connection thread: {e}");
            }
        }
    }
}

/// Running server; dropping it stops accepting new connections.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://<addr>` with an unspecified bind address mapped to loopback.
    pub fn url(&self) -> String {
        let mut addr = self.addr;
        if addr.ip().is_unspecified() {
            addr.set_ip(if addr.is_ipv4() {
                std::net::Ipv4Addr::LOCALHOST.into()
            } else {
                std::net::Ipv6Addr::LOCALHOST.into()
            });
        }
        format!("http://{addr}")
    }

    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        if let Some(thread) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // Wake the blocking accept.
            let mut wake = self.addr;
            if wake.ip().is_unspecified() {
                wake.set_ip(std::net::Ipv4Addr::LOCALHOST.into());
            }
            let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
            let _ = thread.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_now();
    }
}

struct Reply {
    status: u16,
    reason: &'static str,
    content_type: &'static str,
    body: Vec<u8>,
    extra: Vec<(&'static str, String)>,
}

impl Reply {
    fn new(status: u16, reason: &'static str, content_type: &'static str, body: Vec<u8>) -> Self {
        Reply { status, reason, content_type, body, extra: Vec::new() }
    }

    fn error(status: u16, reason: &'static str) -> Self {
        Reply::new(status, reason, "text/plain", format!("{status} {reason}\n").into_bytes())
    }
}

fn serve_connection(stream: TcpStream, handler: &dyn Handler, options: &ServerOptions) -> io::Result<()> {
    stream.set_read_timeout(Some(options.read_timeout))?;
    let _ = stream.set_nodelay(true);
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);

    let head = match read_head(&mut reader) {
        Ok(h) => h,
        Err(HeadError::Closed) => return Ok(()),
        Err(HeadError::Io(e)) => return Err(e),
        Err(HeadError::Malformed(m)) => {
            debug!("bad request head: {m}");
            return write_reply(&mut writer, Reply::error(400, "Bad Request"), options);
        }
    };
    let mut parts = head.start_line.split_whitespace();
    let (method, target) = match (parts.next(), parts.next(), parts.next()) {
        (Some(m), Some(t), Some(v)) if v.starts_with("HTTP/1.") => (m.to_string(), t.to_string()),
        _ => return write_reply(&mut writer, Reply::error(400, "Bad Request"), options),
    };
    let path = target.split('?').next().unwrap_or("/").to_string();

    let reply = match method.as_str() {
        "OPTIONS" if options.cors => Reply::new(204, "No Content", "text/plain", Vec::new()),
        "POST" if path == "/" || path == "/RPC2" => {
            if head.is_chunked() {
                Reply::error(411, "Length Required")
            } else {
                match head.content_length() {
                    Err(_) => Reply::error(400, "Bad Request"),
                    Ok(None) => Reply::error(411, "Length Required"),
                    Ok(Some(len)) if len > options.max_body => Reply::error(413, "Payload Too Large"),
                    Ok(Some(len)) => {
                        let body = read_body(&mut reader, len)?;
                        rpc_reply(&body, handler)
                    }
                }
            }
        }
        "GET" | "HEAD" if path.starts_with("/ui") && options.static_dir.is_some() => {
            let mut r = static_reply(options.static_dir.as_deref().unwrap_or(Path::new(".")), &path);
            if method == "HEAD" {
                r.body.clear();
            }
            r
        }
        "POST" => Reply::error(404, "Not Found"),
        _ if path == "/" || path == "/RPC2" => {
            let mut r = Reply::error(405, "Method Not Allowed");
            r.extra.push(("Allow", "POST".into()));
            r
        }
        _ => Reply::error(404, "Not Found"),
    };
    write_reply(&mut writer, reply, options)?;
    let _ = writer.shutdown(Shutdown::Write);
    Ok(())
}

fn rpc_reply(body: &[u8], handler: &dyn Handler) -> Reply {
    let response = match decode_call(body) {
        Ok(call) => handler.handle(call),
        Err(e) => MethodResponse::Fault(Fault::new(Fault::PARSE_ERROR, format!("parse error: {e}"))),
    };
    let body = encode_response(&response).unwrap_or_else(|e| {
        let fault = MethodResponse::Fault(Fault::new(Fault::INTERNAL_ERROR, format!("cannot encode result: {e}")));
        encode_response(&fault).expect("fault with plain message always encodes")
    });
    Reply::new(200, "OK", "text/xml", body)
}

fn static_reply(root: &Path, path: &str) -> Reply {
    let rel = path.trim_start_matches("/ui").trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let rel = Path::new(rel);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return Reply::error(404, "Not Found");
    }
    let full = root.join(rel);
    match fs::read(&full) {
        Ok(bytes) => {
            let ct = match full.extension().and_then(|e| e.to_str()) {
                Some("html") => "text/html; charset=utf-8",
                Some("js") | Some("mjs") => "text/javascript",
                Some("css") => "text/css",
                Some("json") => "application/json",
                Some("svg") => "image/svg+xml",
                Some("png") => "image/png",
                _ => "application/octet-stream",
            };
            Reply::new(200, "OK", ct, bytes)
        }
        Err(_) => Reply::error(404, "Not Found"),
    }
}

fn write_reply(w: &mut TcpStream, reply: Reply, options: &ServerOptions) -> io::Result<()> {
    let mut head = format!(
        "HTTP/1.1 {} {}\r\nServer: rfim-xmlrpc\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n",
        reply.status,
        reply.reason,
        reply.content_type,
        reply.body.len()
    );
    if options.cors {
        head.push_str(
            "Access-Control-Allow-Origin: *\r\nAccess-Control-Allow-Methods: POST, GET, OPTIONS\r\n\
             Access-Control-Allow-Headers: Content-Type\r\n",
        );
    }
    for (k, v) in &reply.extra {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    w.write_all(head.as_bytes())?;
    w.write_all(&reply.body)?;
    w.flush()
}
