use clap::ValueEnum;
use pswitch::format::{general_to_dot, sp_to_dot, Circuit};
use pswitch::rational::to_decimal;
use pswitch::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Exact fractions.
    Exact,
    /// Decimals rounded to `--digits` places.
    Decimal,
    /// Graphviz source for the resulting circuit.
    Dot,
}

/// Renders values in the selected format. Rendering never feeds back into a
/// computation.
#[derive(Clone, Copy, Debug)]
pub struct Renderer {
    pub format: OutputFormat,
    pub digits: u32,
}

impl Renderer {
    pub fn value(&self, v: &Rational) -> String {
        match self.format {
            OutputFormat::Decimal => to_decimal(v, self.digits),
            OutputFormat::Exact | OutputFormat::Dot => v.to_string(),
        }
    }

    pub fn list<'a>(&self, values: impl IntoIterator<Item = &'a Rational>) -> String {
        values
            .into_iter()
            .map(|v| self.value(v))
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn is_dot(&self) -> bool {
        self.format == OutputFormat::Dot
    }

    pub fn dot(circuit: &Circuit) -> String {
        match circuit {
            Circuit::Sp(c) => sp_to_dot(c),
            Circuit::General(g) => general_to_dot(g),
        }
    }

    /// Closing line stating the decimal precision, empty for exact output.
    pub fn footer(&self) -> Option<String> {
        (self.format == OutputFormat::Decimal)
            .then(|| format!("# decimals rounded to {} digits", self.digits))
    }
}
