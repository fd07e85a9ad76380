#!/usr/bin/env python3
"""Regenerate the bundled corpus and the oracle golden files.

Requires RDKit. Everything written here is pinned in crates/core/data and is
only regenerated by hand; the Rust build never runs this script.

Outputs
  data/corpus.smi                 10,000 cleaned drug-like molecules (SMILES<TAB>id)
  data/reference_pairs.tsv        the four benchmark reference pairs
  data/golden/qed_drugs.tsv       QED + descriptor vector for 20 named drugs
  data/golden/sas_oracle.tsv      SA score for 100 corpus molecules
  data/crippen.tsv                Wildman-Crippen atom-type table (copied)
"""
import os
import random
import sys

from rdkit import Chem, RDConfig, RDLogger
from rdkit.Chem import QED, Crippen, Descriptors, MolSurf
from rdkit.Chem import rdMolDescriptors as rdmd

sys.path.append(os.path.join(RDConfig.RDContribDir, "SA_Score"))
import sascorer  # noqa: E402

RDLogger.DisableLog("rdApp.*")

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "crates", "core", "data")
RD = os.path.dirname(Chem.__file__).rsplit("/", 1)[0]

ALLOWED = {5, 6, 7, 8, 9, 15, 16, 17, 35, 53}


def sources():
    with open(os.path.join(RDConfig.RDDataDir, "NCI", "first_5K.smi")) as f:
        for line in f:
            parts = line.split()
            if len(parts) >= 2:
                yield parts[0], "NCI-" + parts[1]
    with open(os.path.join(RDConfig.RDContribDir, "FreeWilson", "data", "CHEMBL2321810.smi")) as f:
        for line in f:
            parts = line.split()
            if len(parts) >= 2:
                yield parts[0], "CHEMBL-" + parts[1]
    with open(os.path.join(RDConfig.RDDataDir, "Pains", "test_data", "wehi_mols.csv")) as f:
        for line in f:
            parts = line.strip().split(",")
            if len(parts) >= 2:
                yield parts[0].strip('"'), parts[1].strip('"')


def clean(smi):
    m = Chem.MolFromSmiles(smi)
    if m is None:
        return None
    Chem.RemoveStereochemistry(m)
    frags = Chem.GetMolFrags(m, asMols=True)
    m = max(frags, key=lambda x: (x.GetNumHeavyAtoms(), Chem.MolToSmiles(x)))
    for a in m.GetAtoms():
        if a.GetAtomicNum() not in ALLOWED or a.GetIsotope() or a.GetNumRadicalElectrons():
            return None
    if not 6 <= m.GetNumHeavyAtoms() <= 60:
        return None
    out = Chem.MolToSmiles(m)
    if not 10 <= len(out) <= 200:
        return None
    return out


def build_corpus():
    seen = set()
    rows = []
    for smi, ident in sources():
        c = clean(smi)
        if c is None or c in seen:
            continue
        seen.add(c)
        rows.append((c, ident))
    random.Random(20221123).shuffle(rows)
    rows = rows[:10000]
    with open(os.path.join(DATA, "corpus.smi"), "w") as f:
        f.write("# cleaned corpus: NCI first 5K, ChEMBL FreeWilson series, WEHI set (via RDKit data)\n")
        for c, ident in rows:
            f.write(f"{c}\t{ident}\n")
    return rows


PAIRS = [
    ("NSAID", "Ibuprofen", "CC(C)Cc1ccc(cc1)C(C)C(=O)O", "Naproxen", "COc1ccc2cc(ccc2c1)C(C)C(=O)O"),
    ("EGFR", "Gefitinib", "COc1cc2ncnc(Nc3ccc(F)c(Cl)c3)c2cc1OCCCN1CCOCC1",
     "Erlotinib", "COCCOc1cc2ncnc(Nc3cccc(c3)C#C)c2cc1OCCOC"),
    ("VEGFR", "Pazopanib", "Cc1ccc(Nc2nccc(n2)N(C)c2ccc3c(C)n(C)nc3c2)cc1S(N)(=O)=O",
     "Sunitinib", "CCN(CC)CCNC(=O)c1c(C)[nH]c(C=C2C(=O)Nc3ccc(F)cc23)c1C"),
    ("PI3K", "Alpelisib", "Cc1nc(NC(=O)N2CCCC2C(N)=O)sc1-c1ccnc(c1)C(C)(C)C(F)(F)F",
     "Inavolisib", "CC(C(=O)N)NC1=CC2=C(C=C1)C3=NC(=CN3CCO2)N4C(COC4=O)C(F)F"),
]

DRUGS = [
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
    ("paracetamol", "CC(=O)Nc1ccc(O)cc1"),
    ("caffeine", "Cn1c(=O)c2c(ncn2C)n(C)c1=O"),
    ("diazepam", "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21"),
    ("fluoxetine", "CNCCC(Oc1ccc(cc1)C(F)(F)F)c1ccccc1"),
    ("celecoxib", "Cc1ccc(cc1)-c1cc(nn1-c1ccc(cc1)S(N)(=O)=O)C(F)(F)F"),
    ("imatinib", "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(n1)-c1cccnc1"),
    ("omeprazole", "COc1ccc2[nH]c(nc2c1)S(=O)Cc1ncc(C)c(OC)c1C"),
    ("warfarin", "CC(=O)CC(c1ccccc1)c1c(O)c2ccccc2oc1=O"),
    ("ciprofloxacin", "OC(=O)c1cn(C2CC2)c2cc(N3CCNCC3)c(F)cc2c1=O"),
    ("sildenafil", "CCCc1nn(C)c2c(=O)[nH]c(nc12)-c1cc(ccc1OCC)S(=O)(=O)N1CCN(C)CC1"),
    ("loratadine", "CCOC(=O)N1CCC(=C2c3ccc(Cl)cc3CCc3cccnc23)CC1"),
]


def descriptor_row(name, smi):
    m = Chem.MolFromSmiles(smi)
    p = QED.properties(m)
    return [name, Chem.MolToSmiles(m), f"{QED.qed(m):.6f}", f"{p.MW:.4f}", f"{p.ALOGP:.4f}",
            str(p.HBA), str(p.HBD), f"{p.PSA:.4f}", str(p.ROTB), str(p.AROM), str(p.ALERTS),
            f"{sascorer.calculateScore(m):.6f}"]


def main():
    rows = build_corpus()
    with open(os.path.join(DATA, "reference_pairs.tsv"), "w") as f:
        f.write("# class\tname_a\tsmiles_a\tname_b\tsmiles_b\n")
        for cls, na, sa, nb, sb in PAIRS:
            f.write(f"{cls}\t{na}\t{Chem.MolToSmiles(Chem.MolFromSmiles(sa))}\t"
                    f"{nb}\t{Chem.MolToSmiles(Chem.MolFromSmiles(sb))}\n")

    header = "# name\tsmiles\tqed\tmw\tlogp\thba\thbd\ttpsa\trotb\tarom_rings\talerts\tsas\n"
    with open(os.path.join(DATA, "golden", "qed_drugs.tsv"), "w") as f:
        f.write("# oracle: RDKit " + Chem.rdBase.rdkitVersion + " QED (mean weights) and properties\n")
        f.write(header)
        named = [(na, sa) for _, na, sa, _, _ in PAIRS] + [(nb, sb) for _, _, _, nb, sb in PAIRS]
        for name, smi in named + DRUGS:
            f.write("\t".join(descriptor_row(name.lower(), smi)) + "\n")

    rng = random.Random(7)
    picks = rng.sample(rows, 100)
    with open(os.path.join(DATA, "golden", "sas_oracle.tsv"), "w") as f:
        f.write("# oracle: RDKit " + Chem.rdBase.rdkitVersion + " sascorer with the published fragment table\n")
        f.write("# smiles\tid\tsas\n")
        for c, ident in picks:
            m = Chem.MolFromSmiles(c)
            f.write(f"{c}\t{ident}\t{sascorer.calculateScore(m):.6f}\n")


if __name__ == "__main__":
    main()
