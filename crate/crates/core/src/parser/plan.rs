use super::domain::{expect_list, expect_name};
use super::sexpr::read_all;
use super::ParseError;
use crate::model::{Plan, PlanStep};

/// Parses a sequence of ground steps `(name arg ...)`, one per line.
///
/// Names are not resolved here; see [`crate::grounding::resolve_plan`].
pub fn parse_plan(text: &str) -> Result<Plan, ParseError> {
    let mut steps = Vec::new();
    for e in read_all(text)? {
        let items = expect_list(&e, "plan step")?;
        let (name, args) = items
            .split_first()
            .ok_or_else(|| ParseError::syntax("empty plan step", e.span()))?;
        let name = expect_name(name, "action name")?;
        let args = args
            .iter()
            .map(|a| expect_name(a, "object").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        steps.push(PlanStep { name: name.to_string(), args });
    }
    Ok(Plan { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_plan() {
        let p = parse_plan("(a1)\n(a2)").unwrap();
        assert_eq!(p.steps, vec![PlanStep::new::<&str>("a1", []), PlanStep::new::<&str>("a2", [])]);
    }

    #[test]
    fn empty_file_is_empty_plan() {
        assert!(parse_plan("").unwrap().is_empty());
        assert!(parse_plan("; only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn steps_with_arguments() {
        let p = parse_plan("(PICK-UP b1 Room1) ; first\n").unwrap();
        assert_eq!(p.steps, vec![PlanStep::new("pick-up", ["b1", "room1"])]);
    }

    #[test]
    fn malformed_steps() {
        assert!(parse_plan("a1").is_err());
        assert!(parse_plan("()").is_err());
        assert!(parse_plan("(a1 ?x)").is_err());
        assert_eq!(parse_plan("(a1)\n(a2").unwrap_err().span.line, 2);
    }
}
