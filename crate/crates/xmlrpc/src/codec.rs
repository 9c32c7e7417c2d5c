//! Conversion between [`MethodCall`] / [`MethodResponse`] and XML-RPC documents.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{CodecError, Position};
use crate::value::{valid_method_name, Fault, MethodCall, MethodResponse, Value};
use crate::xml::{self, Element};

const PROLOG: &str = "<?xml version=\"1.0\"?>";

pub fn encode_call(call: &MethodCall) -> Result<Vec<u8>, CodecError> {
    if !valid_method_name(call.name()) {
        return Err(CodecError::Encode(format!("invalid method name `{}`", call.name())));
    }
    let mut out = String::with_capacity(256);
    out.push_str(PROLOG);
    out.push_str("<methodCall><methodName>");
    out.push_str(call.name());
    out.push_str("</methodName><params>");
    for p in &call.params {
        out.push_str("<param>");
        encode_value(&mut out, p)?;
        out.push_str("</param>");
    }
    out.push_str("</params></methodCall>");
    Ok(out.into_bytes())
}

pub fn encode_response(response: &MethodResponse) -> Result<Vec<u8>, CodecError> {
    let mut out = String::with_capacity(256);
    out.push_str(PROLOG);
    out.push_str("<methodResponse>");
    match response {
        MethodResponse::Success(v) => {
            out.push_str("<params><param>");
            encode_value(&mut out, v)?;
            out.push_str("</param></params>");
        }
        MethodResponse::Fault(f) => {
            let mut fields = BTreeMap::new();
            fields.insert("faultCode".to_string(), Value::Int(f.code));
            fields.insert("faultString".to_string(), Value::String(f.message.clone()));
            out.push_str("<fault>");
            encode_value(&mut out, &Value::Struct(fields))?;
            out.push_str("</fault>");
        }
    }
    out.push_str("</methodResponse>");
    Ok(out.into_bytes())
}

/// Renders one `<value>` element.
pub fn encode_value(out: &mut String, value: &Value) -> Result<(), CodecError> {
    out.push_str("<value>");
    match value {
        Value::Int(i) => {
            let _ = write!(out, "<int>{i}</int>");
        }
        Value::Double(d) => {
            if !d.is_finite() {
                return Err(CodecError::Encode(format!("non-finite double {d}")));
            }
            // `Display` for f64 is the shortest decimal that reads back to the
            // same bits and never uses exponent notation.
            let _ = write!(out, "<double>{d}</double>");
        }
        Value::Boolean(b) => {
            out.push_str(if *b { "<boolean>1</boolean>" } else { "<boolean>0</boolean>" });
        }
        Value::String(s) => {
            check_text(s)?;
            out.push_str("<string>");
            xml::escape_into(out, s);
            out.push_str("</string>");
        }
        Value::Array(items) => {
            out.push_str("<array><data>");
            for item in items {
                encode_value(out, item)?;
            }
            out.push_str("</data></array>");
        }
        Value::Struct(fields) => {
            out.push_str("<struct>");
            for (name, v) in fields {
                check_text(name)?;
                out.push_str("<member><name>");
                xml::escape_into(out, name);
                out.push_str("</name>");
                encode_value(out, v)?;
                out.push_str("</member>");
            }
            out.push_str("</struct>");
        }
    }
    out.push_str("</value>");
    Ok(())
}

fn check_text(s: &str) -> Result<(), CodecError> {
    match s.chars().find(|&c| !xml::is_xml_char(c)) {
        Some(c) => Err(CodecError::Encode(format!(
            "character U+{:04X} cannot be represented in XML",
            c as u32
        ))),
        None => Ok(()),
    }
}

fn as_text(bytes: &[u8]) -> Result<&str, CodecError> {
    std::str::from_utf8(bytes).map_err(|_| CodecError::Utf8)
}

fn expect_name<'e>(src: &str, el: &'e Element, name: &str) -> Result<&'e Element, CodecError> {
    if el.name == name {
        Ok(el)
    } else {
        Err(CodecError::structure(
            format!("expected <{name}>, found <{}>", el.name),
            Position::at(src, el.offset),
        ))
    }
}

fn single_child<'e>(src: &str, el: &'e Element, name: &str) -> Result<&'e Element, CodecError> {
    let kids = el.element_children(src)?;
    match kids.as_slice() {
        [only] => expect_name(src, only, name),
        _ => Err(CodecError::structure(
            format!("<{}> must contain exactly one <{name}>", el.name),
            Position::at(src, el.offset),
        )),
    }
}

fn decode_params(src: &str, params: &Element) -> Result<Vec<Value>, CodecError> {
    params
        .element_children(src)?
        .into_iter()
        .map(|param| {
            let param = expect_name(src, param, "param")?;
            decode_value(src, single_child(src, param, "value")?)
        })
        .collect()
}

pub fn decode_call(bytes: &[u8]) -> Result<MethodCall, CodecError> {
    let src = as_text(bytes)?;
    let root = xml::parse_document(src)?;
    expect_name(src, &root, "methodCall")?;
    let mut name = None;
    let mut params = Vec::new();
    for child in root.element_children(src)? {
        match child.name.as_str() {
            "methodName" if name.is_none() => {
                if child.has_element_children() {
                    return Err(CodecError::structure(
                        "<methodName> must contain text only",
                        Position::at(src, child.offset),
                    ));
                }
                name = Some((child.text().trim().to_string(), child.offset));
            }
            "params" => params = decode_params(src, child)?,
            other => {
                return Err(CodecError::structure(
                    format!("unexpected <{other}> in <methodCall>"),
                    Position::at(src, child.offset),
                ))
            }
        }
    }
    let (name, offset) = name.ok_or_else(|| {
        CodecError::structure("missing <methodName>", Position::at(src, root.offset))
    })?;
    MethodCall::try_new(&name, params).map_err(|_| {
        CodecError::structure(format!("invalid method name `{name}`"), Position::at(src, offset))
    })
}

pub fn decode_response(bytes: &[u8]) -> Result<MethodResponse, CodecError> {
    let src = as_text(bytes)?;
    let root = xml::parse_document(src)?;
    expect_name(src, &root, "methodResponse")?;
    let kids = root.element_children(src)?;
    let body = match kids.as_slice() {
        [only] => *only,
        _ => {
            return Err(CodecError::structure(
                "<methodResponse> must contain exactly one of <params> or <fault>",
                Position::at(src, root.offset),
            ))
        }
    };
    match body.name.as_str() {
        "params" => {
            let mut values = decode_params(src, body)?;
            if values.len() != 1 {
                return Err(CodecError::structure(
                    "response <params> must hold exactly one <param>",
                    Position::at(src, body.offset),
                ));
            }
            Ok(MethodResponse::Success(values.remove(0)))
        }
        "fault" => {
            let value = decode_value(src, single_child(src, body, "value")?)?;
            let bad = || {
                CodecError::structure(
                    "fault must be a struct with int faultCode and string faultString",
                    Position::at(src, body.offset),
                )
            };
            let fields = value.as_struct().ok_or_else(bad)?;
            let code = fields.get("faultCode").and_then(Value::as_i32).ok_or_else(bad)?;
            let message = fields.get("faultString").and_then(Value::as_str).ok_or_else(bad)?;
            Ok(MethodResponse::Fault(Fault::new(code, message)))
        }
        other => Err(CodecError::structure(
            format!("unexpected <{other}> in <methodResponse>"),
            Position::at(src, body.offset),
        )),
    }
}

fn decode_value(src: &str, value: &Element) -> Result<Value, CodecError> {
    let pos = |el: &Element| Position::at(src, el.offset);
    if !value.has_element_children() {
        return Ok(Value::String(value.text()));
    }
    let typed = single_typed(src, value)?;
    let scalar = |el: &Element| -> Result<String, CodecError> {
        if el.has_element_children() {
            return Err(CodecError::structure(format!("<{}> must contain text only", el.name), pos(el)));
        }
        Ok(el.text())
    };
    match typed.name.as_str() {
        "int" | "i4" => {
            let text = scalar(typed)?;
            text.trim()
                .parse::<i32>()
                .map(Value::Int)
                .map_err(|_| CodecError::structure(format!("invalid int `{text}`"), pos(typed)))
        }
        "double" => {
            let text = scalar(typed)?;
            match text.trim().parse::<f64>() {
                Ok(d) if d.is_finite() => Ok(Value::Double(d)),
                _ => Err(CodecError::structure(format!("invalid double `{text}`"), pos(typed))),
            }
        }
        "boolean" => match scalar(typed)?.trim() {
            "0" => Ok(Value::Boolean(false)),
            "1" => Ok(Value::Boolean(true)),
            other => Err(CodecError::structure(format!("invalid boolean `{other}`"), pos(typed))),
        },
        "string" => scalar(typed).map(Value::String),
        "array" => {
            let data = single_child(src, typed, "data")?;
            data.element_children(src)?
                .into_iter()
                .map(|v| decode_value(src, expect_name(src, v, "value")?))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        "struct" => {
            let mut fields = BTreeMap::new();
            for member in typed.element_children(src)? {
                let member = expect_name(src, member, "member")?;
                let parts = member.element_children(src)?;
                let (name, v) = match parts.as_slice() {
                    [n, v] if n.name == "name" && v.name == "value" => (n, v),
                    _ => {
                        return Err(CodecError::structure(
                            "<member> must hold <name> then <value>",
                            pos(member),
                        ))
                    }
                };
                let key = scalar(name)?;
                if fields.insert(key.clone(), decode_value(src, v)?).is_some() {
                    return Err(CodecError::structure(format!("duplicate member `{key}`"), pos(member)));
                }
            }
            Ok(Value::Struct(fields))
        }
        other => Err(CodecError::UnknownType { tag: other.to_string(), position: pos(typed) }),
    }
}

fn single_typed<'e>(src: &str, value: &'e Element) -> Result<&'e Element, CodecError> {
    let kids = value.element_children(src)?;
    match kids.as_slice() {
        [only] => Ok(only),
        _ => Err(CodecError::structure(
            "<value> must hold a single typed element",
            Position::at(src, value.offset),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(bytes: Vec<u8>) -> String {
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn call_template() {
        let xml = text(encode_call(&MethodCall::new("finish", vec![Value::Int(3)])).unwrap());
        assert_eq!(
            xml,
            "<?xml version=\"1.0\"?><methodCall><methodName>finish</methodName><params>\
             <param><value><int>3</int></value></param></params></methodCall>"
        );
    }

    #[test]
    fn double_rendering() {
        let mut s = String::new();
        encode_value(&mut s, &Value::Double(4.236)).unwrap();
        assert_eq!(s, "<value><double>4.236</double></value>");
        for d in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            assert!(encode_value(&mut String::new(), &Value::Double(d)).is_err());
        }
    }

    #[test]
    fn nested_array() {
        let v = Value::from(vec![Value::Int(0), Value::doubles(&[8.0, -5.0])]);
        let call = MethodCall::new("store_array1", vec![v]);
        let xml = text(encode_call(&call).unwrap());
        assert!(xml.contains("<array><data><value><int>0</int></value><value><array><data>"));
        assert_eq!(decode_call(xml.as_bytes()).unwrap(), call);
    }

    #[test]
    fn untyped_value_is_string() {
        let doc = "<methodCall><methodName>echo</methodName><params><param>\
                   <value>hello</value></param><param><value><i4>-7</i4></value></param></params></methodCall>";
        let call = decode_call(doc.as_bytes()).unwrap();
        assert_eq!(call.params, vec![Value::from("hello"), Value::Int(-7)]);
    }

    #[test]
    fn empty_untyped_and_params() {
        let doc = "<methodCall><methodName>fin_as_far</methodName><params><param><value/></param></params></methodCall>";
        assert_eq!(decode_call(doc.as_bytes()).unwrap().params, vec![Value::from("")]);
        let doc = "<methodCall><methodName>fin_as_far</methodName></methodCall>";
        assert!(decode_call(doc.as_bytes()).unwrap().params.is_empty());
    }

    #[test]
    fn rejects_extensions_and_garbage() {
        for tag in ["<nil/>", "<base64>AA==</base64>", "<dateTime.iso8601>20240101T00:00:00</dateTime.iso8601>"] {
            let doc = format!("<methodResponse><params><param><value>{tag}</value></param></params></methodResponse>");
            assert!(matches!(decode_response(doc.as_bytes()), Err(CodecError::UnknownType { .. })), "{tag}");
        }
        let bad = [
            "<methodCall><params/></methodCall>",
            "<methodCall><methodName>x</methodName><params><param><value><int>1.5</int></value></param></params></methodCall>",
            "<methodCall><methodName>x</methodName><params><param><value><boolean>2</boolean></value></param></params></methodCall>",
            "<methodCall><methodName>x</methodName><params><param><value><double>nan</double></value></param></params></methodCall>",
            "<methodCall><methodName>x</methodName><params><param><value><int>99999999999</int></value></param></params></methodCall>",
            "<methodCall><methodName>x</methodName><params><param><value><int>1</int><int>2</int></value></param></params></methodCall>",
            "<methodCall><methodName>has space</methodName></methodCall>",
            "<methodCall><methodName>x</methodName><params><param><value><int>1</int></value>",
        ];
        for doc in bad {
            assert!(decode_call(doc.as_bytes()).is_err(), "{doc}");
        }
        assert_eq!(decode_call(&[0xff, 0xfe]), Err(CodecError::Utf8));
    }

    #[test]
    fn fault_round_trip() {
        let r = MethodResponse::fault(-32700, "parse <error> & more");
        let bytes = encode_response(&r).unwrap();
        assert_eq!(decode_response(&bytes).unwrap(), r);
    }

    #[test]
    fn strings_with_markup_and_line_endings() {
        let v = Value::from("a<b>&c\r\nd\re\tf \u{1F600}");
        let r = MethodResponse::Success(v.clone());
        assert_eq!(decode_response(&encode_response(&r).unwrap()).unwrap(), r);
        assert!(encode_response(&MethodResponse::Success(Value::from("\u{1}"))).is_err());
    }
}
