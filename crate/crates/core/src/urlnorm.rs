//! URL normalization shared by the crawler and the registry.
//!
//! Normal form. scheme and host lowercased, fragment removed, default port
//! removed, dot-segments collapsed, relative references resolved against the
//! page they were found on. Camera identity is derived from this form, so it
//! must be deterministic and idempotent.

use url::Url;

use crate::error::{Error, Result};

/// Normalize a raw URL reference, resolving it against `base` when relative.
pub fn normalize_url(raw: &str, base: Option<&Url>) -> Result<Url> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(Error::MalformedUrl {
            input: raw.to_string(),
            source: url::ParseError::EmptyHost,
        });
    }
    let parsed = match Url::parse(raw) {
        Ok(u) => u,
        Err(url::ParseError::RelativeUrlWithoutBase) => match base {
            Some(b) => b.join(raw).map_err(|source| Error::MalformedUrl {
                input: raw.to_string(),
                source,
            })?,
            None => {
                return Err(Error::MalformedUrl {
                    input: raw.to_string(),
                    source: url::ParseError::RelativeUrlWithoutBase,
                })
            }
        },
        Err(source) => {
            return Err(Error::MalformedUrl {
                input: raw.to_string(),
                source,
            })
        }
    };
    Ok(normalize(parsed))
}

/// Normalize an already-parsed URL.
pub fn normalize(mut url: Url) -> Url {
    url.set_fragment(None);
    // The url crate lowercases hosts of "special" schemes (http, https, ...)
    // but leaves opaque hosts of rtsp/rtmp as written.
    if let Some(host) = url.host_str() {
        if host.chars().any(|c| c.is_ascii_uppercase()) {
            let lowered = host.to_ascii_lowercase();
            let _ = url.set_host(Some(&lowered));
        }
    }
    url
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    #[test]
    fn resolves_relative_reference() {
        let u = normalize_url("cam1.jpg", Some(&base("http://a.example/x/"))).unwrap();
        assert_eq!(u.as_str(), "http://a.example/x/cam1.jpg");
    }

    #[test]
    fn lowercases_and_strips_port_and_fragment() {
        let u = normalize_url("HTTP://A.EXAMPLE:80/p#f", Some(&base("http://other.example/"))).unwrap();
        assert_eq!(u.as_str(), "http://a.example/p");
    }

    #[test]
    fn collapses_dot_segments() {
        let u = normalize_url("../img/c.jpg", Some(&base("http://a.example/x/y/"))).unwrap();
        assert_eq!(u.as_str(), "http://a.example/x/img/c.jpg");
    }

    #[test]
    fn lowercases_rtsp_host() {
        let u = normalize_url("RTSP://CAM.Example:554/Live", None).unwrap();
        assert_eq!(u.scheme(), "rtsp");
        assert_eq!(u.host_str(), Some("cam.example"));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(normalize_url("", Some(&base("http://a.example/"))).is_err());
        assert!(normalize_url("   ", Some(&base("http://a.example/"))).is_err());
    }

    #[test]
    fn relative_without_base_is_an_error() {
        assert!(normalize_url("cam.jpg", None).is_err());
    }

    #[test]
    fn unparseable_input_is_an_error() {
        assert!(normalize_url("http://[::bad", Some(&base("http://a.example/"))).is_err());
    }

    proptest! {
        // normalize(normalize(x)) == normalize(x)
        #[test]
        fn normalization_is_idempotent(
            host in "[a-zA-Z][a-zA-Z0-9.-]{0,20}",
            path in "(/[a-zA-Z0-9._~-]{0,8}){0,4}",
            frag in "[a-zA-Z0-9]{0,6}",
        ) {
            let raw = format!("http://{host}/{path}#{frag}");
            if let Ok(once) = normalize_url(&raw, None) {
                let twice = normalize_url(once.as_str(), None).unwrap();
                prop_assert_eq!(once.as_str(), twice.as_str());
            }
        }
    }
}
