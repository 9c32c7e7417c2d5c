//! XML-RPC over HTTP/1.1: value model, codec, blocking client and a
//! thread-per-connection server.

mod client;
mod codec;
mod error;
mod http;
mod server;
mod value;
mod xml;

pub use client::{post_call, CallError, Client, ClientOptions};
pub use codec::{decode_call, decode_response, encode_call, encode_response, encode_value};
pub use error::{CodecError, Position, TransportError};
pub use server::{Handler, Server, ServerHandle, ServerOptions};
pub use value::{Fault, MethodCall, MethodResponse, Value};
