# create_test_data.py
#
# This utility script generates the TRN1 fixture corpus used by the test suite
# and by hand experiments with the CLI: the small named tournaments, a few
# seeded random ones, and a deliberately malformed file.

import os

import numpy as np

from genverify import paley_tournament, random_tournament, rotational_tournament
from tournament import Tournament, write_trn1

# --- Configuration ---
TEST_DATA_DIR = "test_data"
RANDOM_FIXTURES = {"random12_seed42.trn1": (12, 42), "random30_seed1.trn1": (30, 1)}

# --- Helper Functions ---

def cyclic_triangle() -> Tournament:
    """C3: 0 -> 1 -> 2 -> 0."""
    return Tournament.from_arcs(3, [(0, 1), (1, 2), (2, 0)])


def transitive_triangle() -> Tournament:
    """TT3: 0 -> 1, 0 -> 2, 1 -> 2."""
    return Tournament.from_arcs(3, [(0, 1), (0, 2), (1, 2)])


def transitive_tournament(n: int) -> Tournament:
    """i -> j for every i < j."""
    return Tournament(np.triu(np.ones((n, n), dtype=bool), k=1))


def create_c3(path: str):
    write_trn1(cyclic_triangle(), path)


def create_tt3(path: str):
    write_trn1(transitive_triangle(), path)


def create_paley7(path: str):
    write_trn1(paley_tournament(7), path)


def create_paley11(path: str):
    write_trn1(paley_tournament(11), path)


def create_rotational15(path: str):
    write_trn1(rotational_tournament(15, range(1, 8)), path)


def create_malformed(path: str):
    """A TRN1 header over a matrix with a two-way pair."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("TRN1\n3\n011\n101\n000\n")


def create_all(target_dir: str = TEST_DATA_DIR):
    os.makedirs(target_dir, exist_ok=True)
    creators = {
        "c3.trn1": create_c3,
        "tt3.trn1": create_tt3,
        "paley7.trn1": create_paley7,
        "paley11.trn1": create_paley11,
        "rotational15.trn1": create_rotational15,
        "malformed.trn1": create_malformed,
    }
    for filename, (n, seed) in RANDOM_FIXTURES.items():
        creators[filename] = lambda path, n=n, seed=seed: write_trn1(random_tournament(n, seed), path)

    for filename, function in creators.items():
        filepath = os.path.join(target_dir, filename)
        print(f"  -> Creating '{filename}'...")
        function(filepath)


# --- Main Execution ---
if __name__ == "__main__":
    print(f"Generating test data in '{TEST_DATA_DIR}/'...")
    create_all(TEST_DATA_DIR)
    print("Test data generation complete.")
