use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ops;
use crate::error::{Error, Result};
use crate::imagecore::{decode_image, Image, Mask};

/// Operator names as they appear in recipe files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    Sharpen,
    BlurBackground,
    BlurDarkenBackground,
    Grayscale,
    Contrast,
    ColorTemperature,
    Vibrance,
    Clarity,
    Vignette,
}

impl OpKind {
    pub const ALL: [OpKind; 9] = [
        OpKind::Sharpen,
        OpKind::BlurBackground,
        OpKind::BlurDarkenBackground,
        OpKind::Grayscale,
        OpKind::Contrast,
        OpKind::ColorTemperature,
        OpKind::Vibrance,
        OpKind::Clarity,
        OpKind::Vignette,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Sharpen => "Sharpen",
            OpKind::BlurBackground => "BlurBackground",
            OpKind::BlurDarkenBackground => "BlurDarkenBackground",
            OpKind::Grayscale => "Grayscale",
            OpKind::Contrast => "Contrast",
            OpKind::ColorTemperature => "ColorTemperature",
            OpKind::Vibrance => "Vibrance",
            OpKind::Clarity => "Clarity",
            OpKind::Vignette => "Vignette",
        }
    }

    /// Parameter names accepted by this operator, in recipe-file spelling.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            OpKind::Sharpen => &["amount", "sigma"],
            OpKind::BlurBackground => &["sigma"],
            OpKind::BlurDarkenBackground => &["sigma", "darken"],
            OpKind::Grayscale => &[],
            OpKind::Contrast => &["strength"],
            OpKind::ColorTemperature => &["kelvin"],
            OpKind::Vibrance => &["amount"],
            OpKind::Clarity => &["amount", "radius_frac"],
            OpKind::Vignette => &["strength", "inner"],
        }
    }

    pub fn uses_mask(self) -> bool {
        matches!(self, OpKind::BlurBackground | OpKind::BlurDarkenBackground)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    /// Accepts the exact enum spelling, or its lower/kebab/snake-case forms.
    fn from_str(s: &str) -> Result<Self> {
        let folded: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .flat_map(char::to_lowercase)
            .collect();
        OpKind::ALL
            .into_iter()
            .find(|k| k.name().to_lowercase() == folded)
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: format!("unknown op `{s}`"),
            })
    }
}

/// An operator together with its parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EditOp {
    Sharpen { amount: f64, sigma: f64 },
    BlurBackground { sigma: f64 },
    BlurDarkenBackground { sigma: f64, darken: f64 },
    Grayscale,
    Contrast { strength: f64 },
    ColorTemperature { kelvin: f64 },
    Vibrance { amount: f64 },
    Clarity { amount: f64, radius_frac: f64 },
    Vignette { strength: f64, inner: f64 },
}

impl EditOp {
    pub fn default_for(kind: OpKind) -> EditOp {
        match kind {
            OpKind::Sharpen => EditOp::Sharpen { amount: 1.0, sigma: 1.5 },
            OpKind::BlurBackground => EditOp::BlurBackground { sigma: 4.0 },
            OpKind::BlurDarkenBackground => EditOp::BlurDarkenBackground { sigma: 4.0, darken: 0.7 },
            OpKind::Grayscale => EditOp::Grayscale,
            OpKind::Contrast => EditOp::Contrast { strength: 1.25 },
            OpKind::ColorTemperature => EditOp::ColorTemperature { kelvin: 5000.0 },
            OpKind::Vibrance => EditOp::Vibrance { amount: 0.3 },
            OpKind::Clarity => EditOp::Clarity { amount: 0.5, radius_frac: 0.05 },
            OpKind::Vignette => EditOp::Vignette { strength: 0.5, inner: 0.4 },
        }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            EditOp::Sharpen { .. } => OpKind::Sharpen,
            EditOp::BlurBackground { .. } => OpKind::BlurBackground,
            EditOp::BlurDarkenBackground { .. } => OpKind::BlurDarkenBackground,
            EditOp::Grayscale => OpKind::Grayscale,
            EditOp::Contrast { .. } => OpKind::Contrast,
            EditOp::ColorTemperature { .. } => OpKind::ColorTemperature,
            EditOp::Vibrance { .. } => OpKind::Vibrance,
            EditOp::Clarity { .. } => OpKind::Clarity,
            EditOp::Vignette { .. } => OpKind::Vignette,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match (self, name) {
            (EditOp::Sharpen { amount, .. }, "amount")
            | (EditOp::Vibrance { amount }, "amount")
            | (EditOp::Clarity { amount, .. }, "amount") => Some(*amount),
            (EditOp::Sharpen { sigma, .. }, "sigma")
            | (EditOp::BlurBackground { sigma }, "sigma")
            | (EditOp::BlurDarkenBackground { sigma, .. }, "sigma") => Some(*sigma),
            (EditOp::BlurDarkenBackground { darken, .. }, "darken") => Some(*darken),
            (EditOp::Contrast { strength }, "strength")
            | (EditOp::Vignette { strength, .. }, "strength") => Some(*strength),
            (EditOp::ColorTemperature { kelvin }, "kelvin") => Some(*kelvin),
            (EditOp::Clarity { radius_frac, .. }, "radius_frac") => Some(*radius_frac),
            (EditOp::Vignette { inner, .. }, "inner") => Some(*inner),
            _ => None,
        }
    }

    /// Sets parameter `name`; errors if the operator has no such parameter.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match (self, name) {
            (EditOp::Sharpen { amount, .. }, "amount")
            | (EditOp::Vibrance { amount }, "amount")
            | (EditOp::Clarity { amount, .. }, "amount") => amount,
            (EditOp::Sharpen { sigma, .. }, "sigma")
            | (EditOp::BlurBackground { sigma }, "sigma")
            | (EditOp::BlurDarkenBackground { sigma, .. }, "sigma") => sigma,
            (EditOp::BlurDarkenBackground { darken, .. }, "darken") => darken,
            (EditOp::Contrast { strength }, "strength")
            | (EditOp::Vignette { strength, .. }, "strength") => strength,
            (EditOp::ColorTemperature { kelvin }, "kelvin") => kelvin,
            (EditOp::Clarity { radius_frac, .. }, "radius_frac") => radius_frac,
            (EditOp::Vignette { inner, .. }, "inner") => inner,
            (op, _) => {
                return Err(Error::Parameter(format!(
                    "parameter `{name}` does not apply to {}",
                    op.kind()
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Checks ranges by running the operator's own validation on a 1x1 image.
    pub fn validate(&self) -> Result<()> {
        let probe = Image::filled_srgb(1, 1, [0, 0, 0])?;
        self.apply(&probe, None).map(|_| ())
    }

    pub fn apply(&self, img: &Image, mask: Option<&Mask>) -> Result<Image> {
        match *self {
            EditOp::Sharpen { amount, sigma } => ops::sharpen(img, amount, sigma),
            EditOp::BlurBackground { sigma } => ops::blur_background(img, mask, sigma),
            EditOp::BlurDarkenBackground { sigma, darken } => {
                ops::blur_darken_background(img, mask, sigma, darken)
            }
            EditOp::Grayscale => ops::grayscale(img),
            EditOp::Contrast { strength } => ops::increase_contrast(img, strength),
            EditOp::ColorTemperature { kelvin } => ops::color_temperature(img, kelvin),
            EditOp::Vibrance { amount } => ops::vibrance(img, amount),
            EditOp::Clarity { amount, radius_frac } => ops::clarity(img, amount, radius_frac),
            EditOp::Vignette { strength, inner } => ops::vignette(img, strength, inner),
        }
    }

    /// Row label used in reports.
    pub fn display_name(&self) -> String {
        match self {
            EditOp::Sharpen { .. } => "Sharpening".into(),
            EditOp::BlurBackground { .. } => "Background blurring".into(),
            EditOp::BlurDarkenBackground { .. } => "BG blurring + darkening".into(),
            EditOp::Grayscale => "Grayscale".into(),
            EditOp::Contrast { .. } => "Contrast increasing".into(),
            EditOp::ColorTemperature { kelvin } => format!("Color temperature {kelvin}K"),
            EditOp::Vibrance { .. } => "Vibrance (Saturation)".into(),
            EditOp::Clarity { .. } => "Clarity (Structure)".into(),
            EditOp::Vignette { .. } => "Vignetting".into(),
        }
    }
}

/// One configured edit: operator, parameters, optional mask file and label.
#[derive(Debug, Clone, PartialEq)]
pub struct EditRecipe {
    pub op: EditOp,
    pub mask: Option<PathBuf>,
    pub label: Option<String>,
}

impl EditRecipe {
    pub fn new(op: EditOp) -> Self {
        EditRecipe {
            op,
            mask: None,
            label: None,
        }
    }

    pub fn defaults(kind: OpKind) -> Self {
        Self::new(EditOp::default_for(kind))
    }

    /// The nine operators with default parameters, in table order.
    pub fn all_defaults() -> Vec<EditRecipe> {
        OpKind::ALL.into_iter().map(Self::defaults).collect()
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.op.display_name())
    }

    /// Loads the mask file named by the recipe, if any.
    ///
    /// The file's luma (0..255) is mapped to weights in [0, 1].
    pub fn load_mask(&self) -> Result<Option<Mask>> {
        let Some(path) = &self.mask else {
            return Ok(None);
        };
        load_mask_file(path).map(Some)
    }
}

pub fn load_mask_file(path: &Path) -> Result<Mask> {
    let img = decode_image(path)?;
    let weights = crate::imagecore::filter::luma_plane(&img)
        .into_iter()
        .map(|l| (l / 255.0).clamp(0.0, 1.0))
        .collect();
    Mask::new(img.width(), img.height(), weights)
}

/// Applies a recipe, loading its mask file when one is named.
pub fn apply_recipe(img: &Image, recipe: &EditRecipe) -> Result<Image> {
    let mask = if recipe.op.kind().uses_mask() {
        recipe.load_mask()?
    } else {
        None
    };
    recipe.op.apply(img, mask.as_ref())
}

/// Values to substitute for one parameter of a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

/// A recipe as written in a recipe file, optionally with a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RecipeSpec {
    pub recipe: EditRecipe,
    pub sweep: Option<Sweep>,
}

impl RecipeSpec {
    /// One recipe per sweep value, or the recipe itself without a sweep.
    pub fn expand(&self) -> Result<Vec<EditRecipe>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![self.recipe.clone()]);
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut r = self.recipe.clone();
                r.op.set(&sweep.param, v)?;
                r.op.validate()?;
                r.label = Some(format!("{} [{}={}]", self.recipe.label(), sweep.param, v));
                Ok(r)
            })
            .collect()
    }
}

/// Flat wire form of a recipe object.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecipe {
    op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amount: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    darken: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kelvin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_frac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sweep: Option<Sweep>,
}

impl RawRecipe {
    fn fields(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("amount", self.amount),
            ("sigma", self.sigma),
            ("darken", self.darken),
            ("strength", self.strength),
            ("kelvin", self.kelvin),
            ("radius_frac", self.radius_frac),
            ("inner", self.inner),
        ]
    }

    fn into_spec(self, line: usize) -> Result<RecipeSpec> {
        let at_line = |e: Error| match e {
            Error::Parse { msg, .. } => Error::Parse { line, msg },
            other => other,
        };
        let kind: OpKind = self.op.parse().map_err(at_line)?;
        let mut op = EditOp::default_for(kind);
        for (name, value) in self.fields() {
            if let Some(v) = value {
                op.set(name, v)?;
            }
        }
        op.validate()?;
        if self.mask.is_some() && !kind.uses_mask() {
            return Err(Error::Parameter(format!("{kind} does not take a mask")));
        }
        if let Some(s) = &self.sweep {
            if !kind.params().contains(&s.param.as_str()) {
                return Err(Error::Parameter(format!(
                    "sweep parameter `{}` does not apply to {kind}",
                    s.param
                )));
            }
        }
        Ok(RecipeSpec {
            recipe: EditRecipe {
                op,
                mask: self.mask,
                label: self.label,
            },
            sweep: self.sweep,
        })
    }

    fn from_spec(spec: &RecipeSpec) -> RawRecipe {
        let op = &spec.recipe.op;
        let mut raw = RawRecipe {
            op: op.kind().name().to_string(),
            mask: spec.recipe.mask.clone(),
            label: spec.recipe.label.clone(),
            sweep: spec.sweep.clone(),
            ..Default::default()
        };
        for name in op.kind().params() {
            let v = op.get(name);
            match *name {
                "amount" => raw.amount = v,
                "sigma" => raw.sigma = v,
                "darken" => raw.darken = v,
                "strength" => raw.strength = v,
                "kelvin" => raw.kelvin = v,
                "radius_frac" => raw.radius_frac = v,
                "inner" => raw.inner = v,
                _ => unreachable!(),
            }
        }
        raw
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    }
}

/// Parses a recipe document: a single JSON object or an array of objects.
pub fn parse_recipes(text: &str) -> Result<Vec<RecipeSpec>> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let items = match doc {
        serde_json::Value::Array(v) => v,
        other => vec![other],
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let raw: RawRecipe = serde_json::from_value(v).map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("recipe #{}: {e}", i + 1),
            })?;
            raw.into_spec(i + 1)
        })
        .collect()
}

pub fn load_recipe_file(path: impl AsRef<Path>) -> Result<Vec<RecipeSpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_recipes(&text)
}

/// Serialises recipes as a pretty-printed JSON array.
pub fn recipes_to_json(specs: &[RecipeSpec]) -> String {
    let raws: Vec<RawRecipe> = specs.iter().map(RawRecipe::from_spec).collect();
    serde_json::to_string_pretty(&raws).expect("recipes serialise")
}

impl Serialize for RecipeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawRecipe::from_spec(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RecipeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRecipe::deserialize(d)?;
        raw.into_spec(0).map_err(serde::de::Error::custom)
    }
}

impl Serialize for EditRecipe {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RecipeSpec {
            recipe: self.clone(),
            sweep: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EditRecipe {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = RecipeSpec::deserialize(d)?;
        if spec.sweep.is_some() {
            return Err(serde::de::Error::custom("a single recipe cannot carry a sweep"));
        }
        Ok(spec.recipe)
    }
}
