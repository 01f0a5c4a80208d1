//! Minimal robots.txt support: Disallow rules for the crawler's user agent,
//! with prefix matching. Failure to fetch or parse a robots.txt is treated
//! as allow-all.

/// Disallow prefixes effective for one user agent.
#[derive(Debug, Clone, Default)]
pub struct RobotsRules {
    disallow: Vec<String>,
}

impl RobotsRules {
    pub fn allow_all() -> RobotsRules {
        RobotsRules::default()
    }

    pub fn allows(&self, path: &str) -> bool {
        !self.disallow.iter().any(|p| path.starts_with(p.as_str()))
    }

    pub fn is_unrestricted(&self) -> bool {
        self.disallow.is_empty()
    }
}

/// Product token from a User-Agent header value: "camscout/0.1 (+url)" -> "camscout".
pub fn agent_token(user_agent: &str) -> String {
    user_agent
        .split(|c: char| c == '/' || c.is_whitespace())
        .next()
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Parse a robots.txt body and extract the Disallow prefixes that apply to
/// `user_agent`. A group naming the agent token beats the `*` group.
pub fn parse_robots(body: &str, user_agent: &str) -> RobotsRules {
    let token = agent_token(user_agent);

    struct Group {
        agents: Vec<String>,
        disallow: Vec<String>,
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut in_agent_run = false;

    for raw_line in body.lines() {
        let line = match raw_line.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw_line.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let Some((field, value)) = line.split_once(':') else {
            continue;
        };
        let field = field.trim().to_ascii_lowercase();
        let value = value.trim();
        match field.as_str() {
            "user-agent" => {
                if in_agent_run {
                    if let Some(g) = groups.last_mut() {
                        g.agents.push(value.to_ascii_lowercase());
                    }
                } else {
                    groups.push(Group {
                        agents: vec![value.to_ascii_lowercase()],
                        disallow: Vec::new(),
                    });
                    in_agent_run = true;
                }
            }
            "disallow" => {
                in_agent_run = false;
                if let Some(g) = groups.last_mut() {
                    if !value.is_empty() {
                        g.disallow.push(value.to_string());
                    }
                }
            }
            _ => {
                in_agent_run = false;
            }
        }
    }

    let specific = groups
        .iter()
        .find(|g| g.agents.iter().any(|a| a != "*" && token.contains(a.as_str())));
    let fallback = groups.iter().find(|g| g.agents.iter().any(|a| a == "*"));
    match specific.or(fallback) {
        Some(g) => RobotsRules {
            disallow: g.disallow.clone(),
        },
        None => RobotsRules::allow_all(),
    }
}
