//! Photo-editing operators and the recipe format that configures them.

pub mod ops;
pub mod recipe;

pub use self::ops::{
    blur_background, blur_darken_background, clarity, color_temperature, default_foreground_mask,
    grayscale, increase_contrast, sharpen, smoothstep, vibrance, vignette,
};
pub use self::recipe::{
    apply_recipe, load_mask_file, load_recipe_file, parse_recipes, recipes_to_json, EditOp, EditRecipe, OpKind,
    RecipeSpec, Sweep,
};
