#!/usr/bin/env python3
"""Regenerates the shipped domain schemas, embedding table and lexicons in data/.

The embedding table is built from semantic group centroids plus per-token
noise so that tokens of one group (seating, drinks, placement verbs, ...) are
cosine-close and tokens of different groups are far apart.
"""

import json
import pathlib

import numpy as np

DIM = 300
ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"

STATES = ["IsOpen", "IsOn", "HasWater", "HasCoffee", "HasIceCream", "HasChips", "HasRamen"]
PROPERTIES = [
    "IsSurface", "IsContainer", "IsGraspable", "IsOpenable", "IsTurnable", "IsPressable",
    "IsSqueezeable", "IsPourable", "IsAddable", "IsScoopable", "IsPlaceableIn", "IsPlaceableOn",
]
RELATIONS = ["OnTop", "Inside", "Near", "ConnectedTo"]
GRAMMAR = {
    "OnTop": ["IsGraspable", "IsSurface"],
    "Inside": ["IsGraspable", "IsContainer"],
    "Near": ["robot", "any"],
    "ConnectedTo": ["IsGraspable", "robot"],
}

ACTIONS = [
    {"name": "Grasp", "params": ["robot", "?o"],
     "pre": ["IsGraspable(?o)", "Near(robot,?o)", "!ConnectedTo(?o,robot)", "!ConnectedTo(*,robot)"],
     "add": ["ConnectedTo(?o,robot)"], "del": ["OnTop(?o,*)", "Inside(?o,*)"]},
    {"name": "Release", "params": ["robot", "?o"],
     "pre": ["ConnectedTo(?o,robot)"], "add": [], "del": ["ConnectedTo(?o,robot)"]},
    {"name": "MoveTo", "params": ["robot", "?o"],
     "pre": [], "add": ["Near(robot,?o)"], "del": ["Near(robot,*)"]},
    {"name": "PlaceOn", "params": ["?a", "?b"],
     "pre": ["ConnectedTo(?a,robot)", "IsSurface(?b)", "Near(robot,?b)"],
     "add": ["OnTop(?a,?b)"], "del": ["ConnectedTo(?a,robot)"]},
    {"name": "PlaceIn", "params": ["?a", "?b"],
     "pre": ["ConnectedTo(?a,robot)", "Near(robot,?b)", "IsContainer(?b)",
             "stateIsOpen(?b) if IsOpenable(?b)"],
     "add": ["Inside(?a,?b)"], "del": ["ConnectedTo(?a,robot)"]},
    {"name": "Press", "params": ["?o"],
     "pre": ["Near(robot,?o)", "IsPressable(?o)"], "add": ["stateIsOn(?o)"], "del": []},
    {"name": "Pour", "params": ["?a", "?b"],
     "pre": ["ConnectedTo(?a,robot)", "Near(robot,?b)", "IsPourable(?a)", "IsContainer(?b)",
             "stateHasWater(?a)"],
     "add": ["stateHasWater(?b)"], "del": ["stateHasWater(?a)"]},
    {"name": "Squeeze", "params": ["?a", "?b"],
     "pre": ["ConnectedTo(?a,robot)", "Near(robot,?b)", "IsSqueezeable(?a)"],
     "add": [], "del": ["stateHasWater(?a)", "Inside(?a,?b)"]},
    {"name": "StateOn", "params": ["?o"],
     "pre": ["!stateIsOn(?o)", "IsTurnable(?o)"], "add": ["stateIsOn(?o)"], "del": []},
    {"name": "StateOff", "params": ["?o"],
     "pre": ["stateIsOn(?o)", "IsTurnable(?o)"], "add": [], "del": ["stateIsOn(?o)"]},
    {"name": "StateOpen", "params": ["?o"],
     "pre": ["!stateIsOpen(?o)", "IsOpenable(?o)", "Near(robot,?o)"],
     "add": ["stateIsOpen(?o)"], "del": []},
    {"name": "StateClose", "params": ["?o"],
     "pre": ["stateIsOpen(?o)", "IsOpenable(?o)", "Near(robot,?o)"],
     "add": [], "del": ["stateIsOpen(?o)"]},
]


def cls(props=(), states=()):
    return {"properties": list(props), "states": list(states)}


KITCHEN_CLASSES = {
    "robot": cls(),
    "counter": cls(["IsSurface"]),
    "sink": cls(["IsSurface", "IsContainer"]),
    "tap": cls(["IsTurnable"], ["IsOn"]),
    "stove": cls(["IsSurface", "IsTurnable"], ["IsOn"]),
    "microwave": cls(["IsContainer", "IsOpenable", "IsTurnable", "IsPressable"], ["IsOpen", "IsOn"]),
    "fridge": cls(["IsContainer", "IsOpenable"], ["IsOpen"]),
    "cupboard": cls(["IsContainer", "IsOpenable"], ["IsOpen"]),
    "mug": cls(["IsGraspable", "IsContainer", "IsPourable"], ["HasWater", "HasCoffee"]),
    "kettle": cls(["IsGraspable", "IsContainer", "IsPourable"], ["HasWater"]),
    "milk": cls(["IsGraspable", "IsPourable"]),
    "coke": cls(["IsGraspable", "IsPourable"]),
    "plate": cls(["IsGraspable", "IsSurface"]),
    "icecream": cls(["IsGraspable", "IsScoopable"], ["HasIceCream"]),
    "ramen": cls(["IsGraspable", "IsAddable"], ["HasRamen"]),
    "boiledegg": cls(["IsGraspable"]),
    "salt": cls(["IsGraspable", "IsAddable"]),
    "spoon": cls(["IsGraspable"]),
    "syrup": cls(["IsGraspable", "IsSqueezeable"]),
    "glass": cls(["IsGraspable", "IsContainer", "IsPourable"], ["HasWater"]),
    # Not part of the default scene; available for object-replacement augmentation.
    "cup": cls(["IsGraspable", "IsContainer", "IsPourable"], ["HasWater", "HasCoffee"]),
    "soda": cls(["IsGraspable", "IsPourable"]),
    "dish": cls(["IsGraspable", "IsSurface"]),
    "fork": cls(["IsGraspable"]),
}
KITCHEN_SCENE = [
    "robot", "counter_0", "sink_0", "tap_0", "stove_0", "microwave_0", "fridge_0", "cupboard_0",
    "mug_0", "mug_1", "kettle_0", "milk_0", "coke_0", "plate_0", "plate_1", "icecream_0",
    "ramen_0", "boiledegg_0", "salt_0", "spoon_0", "syrup_0", "glass_0",
]

LIVING_CLASSES = {
    "robot": cls(),
    "loveseat": cls(["IsSurface"]),
    "armchair": cls(["IsSurface"]),
    "table": cls(["IsSurface"]),
    "shelf": cls(["IsSurface"]),
    "tv": cls(["IsTurnable"], ["IsOn"]),
    "xbox": cls(["IsTurnable"], ["IsOn"]),
    "pillow": cls(["IsGraspable"]),
    "book": cls(["IsGraspable"]),
    "beer": cls(["IsGraspable", "IsPourable"]),
    "wine": cls(["IsGraspable", "IsPourable"]),
    "coke": cls(["IsGraspable", "IsPourable"]),
    "bowl": cls(["IsGraspable", "IsContainer"], ["HasChips"]),
    "bagofchips": cls(["IsGraspable"], ["HasChips"]),
    "garbagebin": cls(["IsContainer", "IsOpenable"], ["IsOpen"]),
    "cabinet": cls(["IsContainer", "IsOpenable"], ["IsOpen"]),
    "cd": cls(["IsGraspable"]),
    "remote": cls(["IsGraspable", "IsPressable"], ["IsOn"]),
    # Not part of the default scene; available for object-replacement augmentation.
    "couch": cls(["IsSurface"]),
    "cushion": cls(["IsGraspable"]),
    "magazine": cls(["IsGraspable"]),
    "soda": cls(["IsGraspable", "IsPourable"]),
}
LIVING_SCENE = [
    "robot", "loveseat_0", "armchair_0", "armchair_1", "table_0", "table_1", "shelf_0", "shelf_1",
    "tv_0", "xbox_0", "pillow_0", "pillow_1", "pillow_2", "book_0", "book_1", "beer_0", "wine_0",
    "coke_0", "bowl_0", "bagofchips_0", "garbagebin_0", "cabinet_0", "cd_0", "remote_0",
]


def class_of(obj_id):
    return obj_id if obj_id == "robot" else obj_id.rsplit("_", 1)[0]


def schema(name, classes, scene):
    return {
        "name": name,
        "max_objects": 45,
        "robot": "robot",
        "channelization": "one boolean channel per state family; the complementary "
                          "state (Closed, Off, ...) is the cleared bit",
        "states": STATES,
        "properties": PROPERTIES,
        "relations": RELATIONS,
        "classes": classes,
        "grammar": GRAMMAR,
        "actions": ACTIONS,
        "scene": [[o, class_of(o)] for o in scene],
    }


# Semantic groups for the embedding table. Sub-groups share an extra
# component so that, e.g., couch and loveseat are closer than couch and table.
GROUPS = {
    "seating": [["couch", "loveseat", "sofa"], ["armchair", "chair"]],
    "surface": [["table", "coffee-table", "desk", "tvtable"], ["counter", "countertop"],
                ["shelf", "bookshelf"]],
    "appliance": [["stove", "burner", "oven"], ["microwave"], ["fridge", "refrigerator"],
                  ["tap", "faucet"], ["sink", "basin", "wash"]],
    "storage": [["cupboard", "cabinet", "closet"], ["garbagebin", "bin", "trash", "garbage"]],
    "electronics": [["tv", "television", "screen"], ["xbox", "console"], ["remote", "controller"],
                    ["cd", "disc"]],
    "dishware": [["mug", "cup"], ["glass", "tumbler"], ["plate", "dish", "dishes"],
                 ["bowl"], ["kettle", "pot"]],
    "utensil": [["spoon", "fork", "knife", "utensils"]],
    "drink": [["coke", "soda", "canadadry", "energydrink"], ["beer", "wine"], ["milk"],
              ["water", "coffee"]],
    "food": [["icecream", "ice", "cream"], ["ramen", "noodles"], ["boiledegg", "egg"],
             ["salt"], ["syrup"], ["bagofchips", "chips", "snack"]],
    "soft": [["pillow", "cushion"], ["book", "magazine"]],
    "place_verb": [["put", "set", "place", "lay", "position"], ["move", "carry", "relocate"],
                   ["bring", "fetch", "get", "take"], ["store", "stow", "stash", "keep", "leave"],
                   ["gather", "collect", "arrange", "assemble", "round"]],
    "power_verb": [["turn", "switch", "flip", "power"], ["start", "activate", "fire"]],
    "heat_verb": [["boil", "heat", "warm", "cook"]],
    "open_verb": [["open"], ["close", "shut"]],
    "function": [["the", "a", "an"], ["on", "onto", "top", "of", "up"],
                 ["in", "inside", "into", "within"], ["to", "over", "down"], ["and", "with"],
                 ["from", "off"], ["two", "both"]],
}

ALIASES = {
    "pot": "kettle", "refrigerator": "fridge", "faucet": "tap", "basin": "sink",
    "wash basin": "sink", "burner": "stove", "oven": "stove", "noodles": "ramen",
    "egg": "boiledegg", "ice cream": "icecream", "coffee-table": "table", "coffee table": "table",
    "sofa": "loveseat", "television": "tv", "console": "xbox", "chips": "bagofchips",
    "bin": "garbagebin", "trash can": "garbagebin", "disc": "cd", "controller": "remote",
    "closet": "cabinet", "countertop": "counter", "bookshelf": "shelf", "chair": "armchair",
    "dishes": "plate",
}

VERB_SYNONYMS = [
    ("put", "set"), ("place", "lay"), ("move", "carry"), ("bring", "fetch"), ("store", "stow"),
    ("turn", "flip"), ("switch", "power"), ("start", "activate"), ("gather", "arrange"),
    ("collect", "assemble"), ("boil", "heat"), ("get", "take"),
]

PARAPHRASES = [
    ("place into sink", "keep in wash basin"),
    ("put the", "set down the"),
    ("place the", "position the"),
    ("move the", "relocate the"),
    ("bring the", "carry over the"),
    ("store the", "stash the"),
    ("turn on the", "power up the"),
    ("switch on the", "flip on the"),
    ("start the", "fire up the"),
    ("gather the", "round up the"),
    ("collect the", "pick up the"),
    (" in the ", " inside the "),
    (" on the ", " onto the "),
]


def embeddings():
    rng = np.random.default_rng(20240611)
    table = {}
    for _, subgroups in sorted(GROUPS.items()):
        centroid = rng.normal(size=DIM)
        for words in subgroups:
            sub = rng.normal(size=DIM)
            for w in words:
                v = 1.0 * centroid + 0.7 * sub + 0.45 * rng.normal(size=DIM)
                table[w] = v / np.linalg.norm(v)
    # Every class token of both schemas must be present.
    for classes in (KITCHEN_CLASSES, LIVING_CLASSES):
        for token in classes:
            if token not in table:
                v = rng.normal(size=DIM)
                table[token] = v / np.linalg.norm(v)
    return table


def main():
    ROOT.mkdir(exist_ok=True)
    for name, classes, scene in (("kitchen", KITCHEN_CLASSES, KITCHEN_SCENE),
                                 ("livingroom", LIVING_CLASSES, LIVING_SCENE)):
        with open(ROOT / f"{name}.json", "w") as f:
            json.dump(schema(name, classes, scene), f, indent=1)
            f.write("\n")
    table = embeddings()
    with open(ROOT / "embeddings.txt", "w") as f:
        for token in sorted(table):
            f.write(token + "\t" + " ".join(f"{x:.6f}" for x in table[token]) + "\n")
    with open(ROOT / "aliases.tsv", "w") as f:
        for surface, target in sorted(ALIASES.items()):
            f.write(f"{surface}\t{target}\n")
    with open(ROOT / "verb_synonyms.tsv", "w") as f:
        for verb, unseen in VERB_SYNONYMS:
            f.write(f"{verb}\t{unseen}\n")
    with open(ROOT / "paraphrases.tsv", "w") as f:
        for pattern, rewrite in PARAPHRASES:
            f.write(f"{pattern}\t{rewrite}\n")


if __name__ == "__main__":
    main()
