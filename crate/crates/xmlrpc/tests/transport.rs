use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;
use std::time::Duration;

use rfim_xmlrpc::{
    post_call, CallError, Client, ClientOptions, Fault, MethodCall, MethodResponse, Server, ServerHandle,
    ServerOptions, TransportError, Value,
};

fn echo_server(options: ServerOptions) -> ServerHandle {
    let handler = |call: MethodCall| match call.name() {
        "echo" => MethodResponse::Success(call.params.into_iter().next().unwrap_or(Value::Int(0))),
        "nan" => MethodResponse::Success(Value::Double(f64::NAN)),
        other => MethodResponse::fault(Fault::METHOD_NOT_FOUND, format!("no method {other}")),
    };
    Server::bind("127.0.0.1:0", Arc::new(handler), options).unwrap().spawn().unwrap()
}

fn raw_request(addr: std::net::SocketAddr, request: &str) -> String {
    let mut s = TcpStream::connect(addr).unwrap();
    s.write_all(request.as_bytes()).unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).unwrap();
    out
}

#[test]
fn echo_int() {
    let server = echo_server(ServerOptions::default());
    let client = Client::new(server.url());
    assert_eq!(client.call("echo", vec![Value::Int(7)]).unwrap(), Value::Int(7));
    let rpc2 = Client::new(format!("{}/RPC2", server.url()));
    assert_eq!(rpc2.call("echo", vec![Value::from("x")]).unwrap(), Value::from("x"));
}

#[test]
fn fault_is_not_transport_error() {
    let server = echo_server(ServerOptions::default());
    match Client::new(server.url()).call("nope", vec![]) {
        Err(CallError::Fault(f)) => assert_eq!(f.code, -32601),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unencodable_result_becomes_fault() {
    let server = echo_server(ServerOptions::default());
    match Client::new(server.url()).call("nan", vec![]) {
        Err(CallError::Fault(f)) => assert_eq!(f.code, Fault::INTERNAL_ERROR),
        other => panic!("{other:?}"),
    }
}

#[test]
fn server_down_is_transport_error() {
    let addr = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap()
    };
    let opts = ClientOptions { connect_timeout: Duration::from_secs(2), ..Default::default() };
    let call = MethodCall::new("echo", vec![Value::Int(7)]);
    let err = post_call(&format!("http://{addr}"), &call, &opts).unwrap_err();
    assert!(matches!(err, TransportError::Connect { .. }), "{err:?}");
    let err = Client::with_options(format!("http://{addr}"), opts).call("echo", vec![]).unwrap_err();
    assert!(err.is_transport());
}

#[test]
fn http_error_status_is_transport_error() {
    let server = echo_server(ServerOptions::default());
    let call = MethodCall::new("echo", vec![]);
    let err = post_call(&format!("{}/elsewhere", server.url()), &call, &ClientOptions::default()).unwrap_err();
    assert!(matches!(err, TransportError::Status { code: 404, .. }), "{err:?}");
}

#[test]
fn bad_url() {
    let call = MethodCall::new("echo", vec![]);
    for url in ["not a url", "https://127.0.0.1:1", "ftp://x"] {
        assert!(matches!(post_call(url, &call, &ClientOptions::default()), Err(TransportError::Url(_))));
    }
}

#[test]
fn read_timeout() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hold = std::thread::spawn(move || {
        let (s, _) = listener.accept().unwrap();
        std::thread::sleep(Duration::from_millis(800));
        drop(s);
    });
    let opts = ClientOptions { read_timeout: Duration::from_millis(200), ..Default::default() };
    let err = post_call(&format!("http://{addr}"), &MethodCall::new("echo", vec![]), &opts).unwrap_err();
    assert!(matches!(err, TransportError::Timeout(_)), "{err:?}");
    hold.join().unwrap();
}

#[test]
fn malformed_body_gets_parse_fault() {
    let server = echo_server(ServerOptions::default());
    let body = "<?xml version=\"1.0\"?><methodCall><methodName>echo</methodName><params>";
    let reply = raw_request(
        server.local_addr(),
        &format!("POST / HTTP/1.1\r\nHost: x\r\nContent-Type: text/xml\r\nContent-Length: {}\r\n\r\n{body}", body.len()),
    );
    assert!(reply.starts_with("HTTP/1.1 200 OK"), "{reply}");
    let xml = reply.split("\r\n\r\n").nth(1).unwrap();
    match rfim_xmlrpc::decode_response(xml.as_bytes()).unwrap() {
        MethodResponse::Fault(f) => assert_eq!(f.code, -32700),
        other => panic!("{other:?}"),
    }
}

#[test]
fn chunked_and_lengthless_requests_rejected() {
    let server = echo_server(ServerOptions::default());
    let reply = raw_request(
        server.local_addr(),
        "POST / HTTP/1.1\r\nHost: x\r\nTransfer-Encoding: chunked\r\n\r\n0\r\n\r\n",
    );
    assert!(reply.starts_with("HTTP/1.1 411"), "{reply}");
    let reply = raw_request(server.local_addr(), "POST / HTTP/1.1\r\nHost: x\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 411"), "{reply}");
    let reply = raw_request(server.local_addr(), "GET / HTTP/1.1\r\nHost: x\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 405"), "{reply}");
}

#[test]
fn cors_preflight_and_headers() {
    let server = echo_server(ServerOptions { cors: true, ..Default::default() });
    let reply = raw_request(server.local_addr(), "OPTIONS / HTTP/1.1\r\nHost: x\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 204"), "{reply}");
    assert!(reply.contains("Access-Control-Allow-Origin: *"));
}

#[test]
fn static_ui_files() {
    let dir = std::env::temp_dir().join(format!("rfim-ui-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<h1>console</h1>").unwrap();
    let server = echo_server(ServerOptions { static_dir: Some(dir.clone()), ..Default::default() });
    let reply = raw_request(server.local_addr(), "GET /ui/ HTTP/1.1\r\nHost: x\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 200") && reply.ends_with("<h1>console</h1>"), "{reply}");
    let reply = raw_request(server.local_addr(), "GET /ui/../secret HTTP/1.1\r\nHost: x\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 404"), "{reply}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn concurrent_clients() {
    let server = echo_server(ServerOptions::default());
    let url = server.url();
    let threads: Vec<_> = (0..16)
        .map(|i| {
            let url = url.clone();
            std::thread::spawn(move || {
                let client = Client::new(url);
                for k in 0..10 {
                    let v = Value::from(vec![Value::Int(i), Value::Int(k)]);
                    assert_eq!(client.call("echo", vec![v.clone()]).unwrap(), v);
                }
            })
        })
        .collect();
    for t in threads {
        t.join().unwrap();
    }
}

#[test]
fn shutdown_stops_accepting() {
    let server = echo_server(ServerOptions::default());
    let url = server.url();
    server.shutdown();
    let opts = ClientOptions { connect_timeout: Duration::from_millis(500), ..Default::default() };
    assert!(Client::with_options(url, opts).call("echo", vec![]).is_err());
}
