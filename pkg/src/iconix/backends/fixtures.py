"""Immutable fixture tables backing the mock backends.

Small hand-written worlds around a few root concepts so the whole
pipeline can run offline and deterministically.
"""

from __future__ import annotations

from ..ideation import Category
from ..scaffold import RelationKind, RelationSource

# label -> (concreteness, familiarity, imageability, meaningfulness,
#           category, interpretation)
SCORE_TABLE: dict[str, tuple[int, int, int, int, Category, str]] = {
    "phoenix": (4, 5, 6, 8, Category.CONCRETE_OBJECT,
                "a phoenix rises renewed from its own ashes, a vivid figure for starting over"),
    "sunrise": (4, 7, 7, 8, Category.CONCRETE_OBJECT,
                "a sunrise opens the day and stands for a fresh chance"),
    "lighthouse": (5, 5, 6, 7, Category.CONCRETE_OBJECT,
                   "a lighthouse guides through darkness toward safety"),
    "seed": (4, 6, 6, 8, Category.CONCRETE_OBJECT,
             "a seed carries the promise of growth and new beginnings held in potential"),
    "dove": (5, 6, 6, 7, Category.CONCRETE_OBJECT,
             "a dove returning with a branch signals better things ahead"),
    "optimism": (2, 5, 3, 7, Category.ABSTRACT_NOUN,
                 "optimism is the attitude itself, not a drawable object"),
    "sun": (5, 7, 7, 7, Category.CONCRETE_OBJECT,
            "the sun is the source behind every bright association"),
    "sprout": (4, 5, 6, 6, Category.CONCRETE_OBJECT,
               "a sprout is growth made visible at its first moment"),
    "acorn": (5, 5, 6, 7, Category.CONCRETE_OBJECT,
              "an acorn holds an entire oak in a pocketable shell"),
    "plant": (3, 6, 5, 6, Category.SUPERORDINATE_CATEGORY,
              "plant names a whole category rather than one drawable thing"),
    "beacon": (4, 6, 6, 6, Category.CONCRETE_OBJECT,
               "a beacon is a promise of orientation at a distance"),
    "hamburger": (5, 7, 7, 8, Category.CONCRETE_OBJECT,
                  "a hamburger is the emblematic quick meal, instantly recognizable"),
    "cheese slice": (4, 6, 6, 7, Category.CONCRETE_OBJECT,
                     "a cheese slice reads as fast food in one flat yellow square"),
    "french fry": (5, 7, 6, 7, Category.CONCRETE_OBJECT,
                   "a carton of fries is shorthand for eating on the go"),
    "pizza slice": (5, 7, 7, 7, Category.CONCRETE_OBJECT,
                    "a dripping triangle of pizza says takeaway at a glance"),
    "hot dog": (5, 6, 7, 7, Category.CONCRETE_OBJECT,
                "a hot dog in a bun is street food in a single silhouette"),
    "cuisine": (2, 5, 4, 6, Category.SUPERORDINATE_CATEGORY,
                "cuisine covers every food tradition at once, too broad to depict"),
    "cheeseburger": (4, 6, 6, 7, Category.CONCRETE_OBJECT,
                     "a cheeseburger is the hamburger dialed up one indulgent notch"),
}

DEFAULT_SCORE = (3, 4, 4, 5)
DEFAULT_CATEGORY = Category.CONCRETE_OBJECT

# Knowledge-base style expansions: label -> [(label, gloss)].
KB_EXPANSIONS: dict[str, list[tuple[str, str]]] = {
    "hope": [("sunrise", "first light of day"),
             ("seed", "plant embryo ready to grow"),
             ("dove", "white bird of calm")],
    "fast food": [("hamburger", "patty in a sliced bun"),
                  ("french fry", "fried potato stick"),
                  ("hot dog", "sausage in a long roll")],
    "seed": [("sprout", "newly germinated shoot"),
             ("plant", "living organism of the plant kingdom")],
    "sunrise": [("sun", "the star at the center of the sky")],
    "lighthouse": [("beacon", "signal light set on high")],
}

# Language-model style expansions.
LM_EXPANSIONS: dict[str, list[tuple[str, str]]] = {
    "hope": [("phoenix", "mythical bird reborn from ashes"),
             ("lighthouse", "coastal tower with a guiding light"),
             ("optimism", "confidence in good outcomes")],
    "fast food": [("cheese slice", "square of processed cheese"),
                  ("pizza slice", "wedge cut from a pizza"),
                  ("cuisine", "a style of cooking")],
    "seed": [("acorn", "nut of the oak tree")],
    "hamburger": [("cheeseburger", "hamburger with melted cheese")],
}

# label -> [(relation kind, object, weight)], subject is always the label.
RELATION_TABLE: dict[str, list[tuple[RelationKind, str, float]]] = {
    "hamburger": [
        (RelationKind.KIND_OF, "fast food", 2.5),
        (RelationKind.KIND_OF, "sandwich", 2.0),
        (RelationKind.SYNONYM, "burger", 1.8),
        (RelationKind.HYPERNYM, "dish", 1.2),
        (RelationKind.PART_OF, "bun", 2.2),
        (RelationKind.PART_OF, "patty", 2.0),
        (RelationKind.PART_OF, "cheese", 1.6),
        (RelationKind.PART_OF, "lettuce", 1.2),
        (RelationKind.ATTRIBUTE_OF, "juicy", 0.8),
        (RelationKind.USED_FOR, "eating", 1.5),
        (RelationKind.AT_LOCATION, "restaurant", 1.4),
        (RelationKind.AT_LOCATION, "picnic", 0.7),
        (RelationKind.RELATED_TO, "french fries", 1.6),
        (RelationKind.SYMBOL_OF, "fast food culture", 1.0),
    ],
    "seed": [
        (RelationKind.HYPERNYM, "plant part", 1.5),
        (RelationKind.KIND_OF, "kernel", 1.2),
        (RelationKind.PART_OF, "seed coat", 1.4),
        (RelationKind.PART_OF, "embryo", 1.2),
        (RelationKind.ATTRIBUTE_OF, "small", 0.9),
        (RelationKind.USED_FOR, "planting", 1.8),
        (RelationKind.AT_LOCATION, "soil", 1.6),
        (RelationKind.RELATED_TO, "growth", 1.5),
        (RelationKind.SYMBOL_OF, "potential", 1.3),
        (RelationKind.SIMILAR_TO, "grain", 1.1),
    ],
    "sunrise": [
        (RelationKind.SYNONYM, "daybreak", 1.6),
        (RelationKind.KIND_OF, "natural phenomenon", 1.3),
        (RelationKind.PART_OF, "sun", 2.0),
        (RelationKind.PART_OF, "horizon", 1.6),
        (RelationKind.PART_OF, "sky", 1.2),
        (RelationKind.ATTRIBUTE_OF, "golden", 1.0),
        (RelationKind.AT_LOCATION, "east", 1.2),
        (RelationKind.RELATED_TO, "morning", 1.8),
        (RelationKind.SYMBOL_OF, "new beginnings", 1.6),
        (RelationKind.SIMILAR_TO, "sunset", 1.4),
    ],
    "lighthouse": [
        (RelationKind.KIND_OF, "tower", 2.0),
        (RelationKind.HYPERNYM, "building", 1.5),
        (RelationKind.PART_OF, "lamp", 2.0),
        (RelationKind.PART_OF, "gallery", 1.0),
        (RelationKind.PART_OF, "spiral staircase", 0.8),
        (RelationKind.ATTRIBUTE_OF, "striped", 1.2),
        (RelationKind.USED_FOR, "navigation", 2.2),
        (RelationKind.AT_LOCATION, "coast", 1.9),
        (RelationKind.RELATED_TO, "ship", 1.4),
        (RelationKind.SYMBOL_OF, "guidance", 1.7),
    ],
    "phoenix": [
        (RelationKind.KIND_OF, "mythical bird", 2.2),
        (RelationKind.HYPERNYM, "legendary creature", 1.6),
        (RelationKind.PART_OF, "wings", 1.6),
        (RelationKind.PART_OF, "flame plumage", 1.4),
        (RelationKind.ATTRIBUTE_OF, "fiery", 1.3),
        (RelationKind.AT_LOCATION, "myth", 0.9),
        (RelationKind.RELATED_TO, "fire", 1.8),
        (RelationKind.SYMBOL_OF, "rebirth", 2.4),
        (RelationKind.SIMILAR_TO, "eagle", 1.0),
    ],
    "french fry": [
        (RelationKind.KIND_OF, "side dish", 1.8),
        (RelationKind.SYNONYM, "chips", 1.4),
        (RelationKind.PART_OF, "potato", 2.0),
        (RelationKind.ATTRIBUTE_OF, "crispy", 1.4),
        (RelationKind.USED_FOR, "snacking", 1.3),
        (RelationKind.AT_LOCATION, "diner", 1.2),
        (RelationKind.RELATED_TO, "ketchup", 1.6),
        (RelationKind.SYMBOL_OF, "fast food", 1.1),
    ],
    "cheese slice": [
        (RelationKind.KIND_OF, "dairy product", 1.7),
        (RelationKind.PART_OF, "milk", 1.2),
        (RelationKind.ATTRIBUTE_OF, "yellow", 1.3),
        (RelationKind.USED_FOR, "topping", 1.5),
        (RelationKind.AT_LOCATION, "sandwich", 1.4),
        (RelationKind.RELATED_TO, "cheddar", 1.1),
    ],
    "dove": [
        (RelationKind.KIND_OF, "bird", 2.3),
        (RelationKind.PART_OF, "wings", 1.5),
        (RelationKind.ATTRIBUTE_OF, "white", 1.6),
        (RelationKind.USED_FOR, "messaging", 0.8),
        (RelationKind.AT_LOCATION, "sky", 1.1),
        (RelationKind.RELATED_TO, "olive branch", 1.7),
        (RelationKind.SYMBOL_OF, "peace", 2.5),
    ],
    "sun": [
        (RelationKind.KIND_OF, "star", 2.4),
        (RelationKind.PART_OF, "corona", 1.3),
        (RelationKind.PART_OF, "rays", 1.8),
        (RelationKind.ATTRIBUTE_OF, "bright", 1.7),
        (RelationKind.USED_FOR, "warmth", 1.4),
        (RelationKind.AT_LOCATION, "sky", 2.0),
        (RelationKind.RELATED_TO, "daylight", 1.5),
        (RelationKind.SYMBOL_OF, "energy", 1.2),
    ],
    "pizza slice": [
        (RelationKind.KIND_OF, "fast food", 2.0),
        (RelationKind.PART_OF, "crust", 1.8),
        (RelationKind.PART_OF, "toppings", 1.6),
        (RelationKind.ATTRIBUTE_OF, "cheesy", 1.2),
        (RelationKind.USED_FOR, "eating", 1.3),
        (RelationKind.AT_LOCATION, "pizzeria", 1.5),
        (RelationKind.RELATED_TO, "italy", 1.0),
    ],
    "hot dog": [
        (RelationKind.KIND_OF, "fast food", 2.0),
        (RelationKind.PART_OF, "sausage", 2.0),
        (RelationKind.PART_OF, "bun", 1.8),
        (RelationKind.ATTRIBUTE_OF, "grilled", 1.0),
        (RelationKind.USED_FOR, "eating", 1.2),
        (RelationKind.AT_LOCATION, "ballpark", 1.5),
        (RelationKind.RELATED_TO, "mustard", 1.3),
    ],
}

RELATION_FIXTURE_SOURCE = RelationSource.CONCEPTNET
