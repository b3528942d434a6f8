#!/usr/bin/env python3
"""Writes the synthetic fixture corpus and its hand-assigned ground truth.

Every step is written as (action, variant). Steps sharing an action are
labeled as one step cluster; cases in the same family are labeled as one
group of similar cases. All other cases are their own group.

Usage: generate_fixture.py [output_dir]
"""

import csv
import json
import sys
from pathlib import Path

ACTIONS = {
    "login": [
        "Log in to the game using an existing account",
        "Login to the game using an existing account",
        "Log into the game with an existing account",
    ],
    "login_tutorial": [
        "Login to the game using an existing account that has completed the tutorial",
        "Log in to the game using an existing account that has completed the tutorial",
    ],
    "select_portal": ["Select the Playing from School portal", "Select Playing from School portal"],
    "create_account": ["Create a new account and log in to the game", "Create new account and log in"],
    "tutorial": ["Complete the tutorial quest", "Finish the tutorial quest"],
    "open_inventory": ["Open the inventory menu", "Open inventory menu", "Open the inventroy menu"],
    "open_map": ["Open the world map", "Open world map"],
    "open_shop": ["Open the item shop", "Go to the item shop"],
    "open_settings": ["Open the settings menu", "Open settings menu"],
    "equip_hat": ["Equip the wizard hat", "Equip wizard hat from the inventory"],
    "equip_wand": ["Equip the starter wand", "Equip starter wand from the inventory"],
    "equip_boots": ["Equip the leather boots", "Equip leather boots"],
    "verify_equipped": ["Verify the item is shown as equipped", "Verify item shown as equipped"],
    "verify_item_name": ["Verify item name"],
    "verify_item_description": ["Verify item description"],
    "verify_avatar_hat": ["Verify the avatar wears the wizard hat", "Verify avatar wears wizard hat"],
    "verify_avatar_wand": ["Verify the avatar holds the starter wand"],
    "verify_avatar_boots": ["Verify the avatar wears the leather boots"],
    "travel_forest": ["Travel to the Firefly Forest", "Travel to Firefly Forest on the world map"],
    "travel_town": ["Travel to Lamplight Town", "Travel to the Lamplight Town"],
    "travel_academy": ["Travel to the Academy"],
    "catch_firefly": ["Catch a firefly with the net", "Catch firefly using the net"],
    "verify_firefly": ["Verify the firefly appears in the backpack", "Verify firefly appears in backpack"],
    "buy_hat": ["Buy the wizard hat with gold coins", "Purchase the wizard hat with gold coins"],
    "buy_potion": ["Buy a health potion with gold coins"],
    "verify_gold": ["Verify the gold coins balance decreases", "Verify gold coins balance is reduced"],
    "start_battle": ["Start a battle with a forest monster", "Begin a battle against a forest monster"],
    "answer_right": ["Answer the math question correctly", "Answer math question correctly"],
    "answer_wrong": ["Answer the math question incorrectly", "Answer math question incorrectly"],
    "verify_monster_damage": ["Verify the monster takes damage", "Verify monster takes damage"],
    "verify_player_damage": ["Verify the player takes damage", "Verify player takes damage"],
    "win_battle": ["Win the battle", "Defeat the monster to win the battle"],
    "verify_xp": ["Verify experience points are awarded", "Verify the player receives experience points"],
    "verify_level": ["Verify the player levels up", "Verify player level increases"],
    "save_game": ["Save the game", "Save game progress"],
    "logout": ["Log out of the game", "Logout from the game"],
    "teacher_login": ["Log in as a teacher", "Login as teacher"],
    "open_class": ["Open the class dashboard", "Open class dashboard"],
    "create_assignment": ["Create a new assignment for the class", "Create new assignment for class"],
    "add_student": ["Add a student to the first assignment", "Add student to the first assignment"],
    "remove_student": ["Remove student from the first assignment", "Remove the student from first assignment"],
    "verify_students": ["Verify the student list is updated", "Verify student list updated"],
    "change_volume": ["Change the music volume", "Lower the music volume"],
    "verify_volume": ["Verify the music volume changes"],
    "sound_off": ["Turn off sound effects", "Turn sound effects off"],
    "change_language": ["Change the language to Spanish"],
    "verify_language": ["Verify menu text is shown in Spanish"],
    "adopt_pet": ["Adopt a pet from the pet shop", "Adopt pet from pet shop"],
    "feed_pet": ["Feed the pet a berry", "Give the pet a berry"],
    "verify_pet": ["Verify the pet happiness meter increases", "Verify pet happiness meter increases"],
    "claim_reward": ["Claim the daily reward", "Collect the daily reward"],
    "verify_reward": ["Verify the daily reward is added to the inventory"],
    "drink_potion": ["Drink the health potion", "Use the health potion"],
    "verify_health": ["Verify health is restored", "Verify the player health is restored"],
    "open_house": ["Open the player house", "Go to the player house"],
    "place_chair": ["Place a chair in the house"],
    "verify_chair": ["Verify the chair is shown in the house"],
    "friend_request": ["Send a friend request to another player"],
    "verify_friend": ["Verify the friend request is sent"],
    "repeat": ["Do it again"],
}

# (case_id, name, type, family or None, [(action, variant), ...])
CASES = [
    ("TC01", "Equip Hat", "Inventory", "equip-hat",
     [("login", 0), ("open_inventory", 0), ("equip_hat", 0), ("verify_equipped", 0), ("verify_avatar_hat", 0)]),
    ("TC02", "Equip the Hat", "Inventory", "equip-hat",
     [("login", 0), ("open_inventory", 1), ("equip_hat", 0), ("verify_equipped", 1), ("verify_avatar_hat", 1)]),
    ("TC03", "Equip Wand", "Inventory", None,
     [("login", 0), ("open_inventory", 0), ("equip_wand", 0), ("verify_equipped", 0), ("verify_avatar_wand", 0)]),
    ("TC04", "Equip Boots", "Inventory", None,
     [("login", 1), ("open_inventory", 2), ("equip_boots", 0), ("verify_avatar_boots", 0)]),
    ("TC05", "Catch Firefly in Forest", "Exploration", "catch-firefly",
     [("login", 0), ("open_map", 0), ("travel_forest", 0), ("catch_firefly", 0), ("verify_firefly", 0)]),
    ("TC06", "Catch a Firefly in the Forest", "Exploration", "catch-firefly",
     [("login", 0), ("open_map", 1), ("travel_forest", 0), ("catch_firefly", 1), ("verify_firefly", 1)]),
    ("TC07", "Log in to an existing account", "Login", "existing-login",
     [("login_tutorial", 0), ("select_portal", 0)]),
    ("TC08", "Log in with an existing account", "Login", "existing-login",
     [("login_tutorial", 1), ("select_portal", 1)]),
    ("TC09", "Remove student from assignment", "Teacher", "remove-student",
     [("teacher_login", 0), ("open_class", 0), ("remove_student", 0), ("verify_students", 0)]),
    ("TC10", "Remove a student from the first assignment", "Teacher", "remove-student",
     [("teacher_login", 1), ("open_class", 1), ("remove_student", 1), ("verify_students", 1)]),
    ("TC11", "Remove Student From Assignment", "Teacher", "remove-student",
     [("teacher_login", 0), ("open_class", 0), ("remove_student", 0), ("verify_students", 0)]),
    ("TC12", "Add student to assignment", "Teacher", None,
     [("teacher_login", 0), ("open_class", 0), ("add_student", 0), ("verify_students", 0)]),
    ("TC13", "Create class assignment", "Teacher", None,
     [("teacher_login", 1), ("open_class", 1), ("create_assignment", 0), ("logout", 0)]),
    ("TC14", "Create new player account", "Login", None,
     [("create_account", 0), ("tutorial", 0), ("save_game", 0), ("logout", 0)]),
    ("TC15", "Finish tutorial", "Quest", None,
     [("create_account", 1), ("tutorial", 1), ("verify_xp", 0), ("verify_level", 0)]),
    ("TC16", "Buy wizard hat in shop", "Shop", None,
     [("login", 2), ("open_shop", 0), ("buy_hat", 0), ("verify_gold", 0), ("verify_item_name", 0)]),
    ("TC17", "Buy health potion", "Shop", None,
     [("login", 0), ("open_shop", 1), ("buy_potion", 0), ("verify_gold", 1), ("verify_item_description", 0)]),
    ("TC18", "Inspect item details", "Shop", None,
     [("login", 1), ("open_shop", 0), ("verify_item_name", 0), ("verify_item_description", 0)]),
    ("TC19", "Win battle with correct answers", "Battle", None,
     [("login", 0), ("start_battle", 0), ("answer_right", 0), ("verify_monster_damage", 0), ("win_battle", 0)]),
    ("TC20", "Lose health with wrong answer", "Battle", None,
     [("login", 2), ("start_battle", 1), ("answer_wrong", 0), ("verify_player_damage", 0)]),
    ("TC21", "Level up after battle", "Battle", None,
     [("login", 1), ("start_battle", 0), ("answer_right", 1), ("win_battle", 1), ("verify_level", 1)]),
    ("TC22", "Heal with potion in battle", "Battle", None,
     [("start_battle", 1), ("answer_wrong", 1), ("verify_player_damage", 1), ("drink_potion", 0),
      ("verify_health", 0)]),
    ("TC23", "Drink potion outside battle", "Items", None,
     [("login", 0), ("open_inventory", 0), ("drink_potion", 1), ("verify_health", 1)]),
    ("TC24", "Travel to town", "Exploration", None,
     [("login", 0), ("open_map", 0), ("travel_town", 0), ("save_game", 1)]),
    ("TC25", "Travel to academy", "Exploration", None,
     [("login", 1), ("open_map", 1), ("travel_academy", 0), ("logout", 1)]),
    ("TC26", "Battle in Firefly Forest", "Exploration", None,
     [("open_map", 0), ("travel_forest", 1), ("start_battle", 0), ("answer_right", 0), ("verify_monster_damage", 1)]),
    ("TC27", "Change music volume", "Settings", None,
     [("login", 0), ("open_settings", 0), ("change_volume", 0), ("verify_volume", 0)]),
    ("TC28", "Mute sound effects", "Settings", None,
     [("login", 2), ("open_settings", 1), ("sound_off", 0), ("repeat", 0)]),
    ("TC29", "Switch language to Spanish", "Settings", None,
     [("login", 0), ("open_settings", 0), ("change_language", 0), ("verify_language", 0)]),
    ("TC30", "Adopt a pet", "Pets", None,
     [("login", 1), ("adopt_pet", 0), ("feed_pet", 0), ("verify_pet", 0)]),
    ("TC31", "Feed pet berry", "Pets", None,
     [("login", 0), ("open_inventory", 1), ("feed_pet", 1), ("verify_pet", 1), ("save_game", 0)]),
    ("TC32", "Claim daily reward", "Rewards", None,
     [("login", 0), ("claim_reward", 0), ("verify_reward", 0), ("open_inventory", 0)]),
    ("TC33", "Collect reward after login", "Rewards", None,
     [("login_tutorial", 0), ("claim_reward", 1), ("verify_gold", 0), ("logout", 0)]),
    ("TC34", "Decorate player house", "Housing", None,
     [("login", 0), ("open_house", 0), ("place_chair", 0), ("verify_chair", 0)]),
    ("TC35", "Visit player house", "Housing", None,
     [("login", 2), ("open_house", 1), ("verify_chair", 0), ("logout", 1)]),
    ("TC36", "Send friend request", "Social", None,
     [("login", 0), ("friend_request", 0), ("verify_friend", 0), ("logout", 0)]),
    ("TC37", "Save progress and log out", "Login", None,
     [("login", 1), ("tutorial", 0), ("save_game", 0), ("logout", 1)]),
    ("TC38", "Equip wand after purchase", "Shop", None,
     [("open_shop", 1), ("buy_hat", 1), ("verify_gold", 1), ("open_inventory", 0), ("equip_wand", 1)]),
    ("TC39", "Check item name in inventory", "Inventory", None,
     [("login", 0), ("open_inventory", 0), ("verify_item_name", 0), ("verify_item_description", 0)]),
    ("TC40", "School portal login", None, None,
     [("login_tutorial", 0), ("select_portal", 1), ("open_class", 1), ("verify_students", 1), ("logout", 0)]),
]

# Values frozen from the first verified end-to-end run (seed 1, fixture.conf).
EXPECTED = {"best_k": 50, "best_threshold": 0.9, "groups": 4}

MISSPELLINGS = [("inventroy", "inventory")]


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent
    out.mkdir(parents=True, exist_ok=True)

    step_rows = []
    case_rows = []
    with open(out / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for case_id, name, case_type, family, steps in CASES:
            texts = [ACTIONS[action][variant] for action, variant in steps]
            record = {"case_id": case_id, "name": name, "type": case_type, "steps": texts}
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
            for ordinal, (action, _) in enumerate(steps, start=1):
                step_rows.append((f"{case_id}.{ordinal}", action))
            case_rows.append((case_id, family if family else case_id))

    with open(out / "steps_gt.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["item_id", "label"])
        w.writerows(step_rows)

    with open(out / "cases_gt.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["item_id", "label"])
        w.writerows(case_rows)

    with open(out / "misspellings.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["misspelled", "fixed"])
        w.writerows(MISSPELLINGS)

    families = sorted({fam for *_, fam, _ in CASES if fam})
    manifest = {
        "cases": len(CASES),
        "steps": len(step_rows),
        "step_labels": len({a for _, a in step_rows}),
        "families": {fam: [c[0] for c in CASES if c[3] == fam] for fam in families},
        "expected": EXPECTED,
    }
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
