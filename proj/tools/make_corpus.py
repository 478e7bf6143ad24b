#!/usr/bin/env python3
"""Regenerates data/corpus.smi.

Curated structures plus a combinatorial scaffold x substituent fill.
Deterministic; run from the repository root:

    python3 tools/make_corpus.py > data/corpus.smi
"""

CURATED = [
    "CCO", "CC(=O)O", "CC(C)=O", "CCOCC", "CCN", "NC(N)=O", "OCC(O)CO",
    "OC(=O)CC(O)(CC(=O)O)C(=O)O", "OCC(O)C(O)C(O)C(O)C=O", "CSCCC(N)C(=O)O",
    "NC(CS)C(=O)O", "NC(CCCNC(N)=N)C(=O)O", "NC(CCC(N)=O)C(=O)O",
    "NC(CC(=O)O)C(=O)O", "NC(Cc1ccccc1)C(=O)O", "NC(Cc1ccc(O)cc1)C(=O)O",
    "NC(Cc1c[nH]c2ccccc21)C(=O)O",
    "c1ccccc1", "Cc1ccccc1", "Oc1ccccc1", "Nc1ccccc1", "OC(=O)c1ccccc1",
    "C=Cc1ccccc1", "c1ccc2ccccc2c1", "c1ccc2cc3ccccc3cc2c1", "c1ccncc1",
    "c1cncnc1", "c1cnccn1", "c1c[nH]cn1", "c1cc[nH]c1", "c1ccoc1",
    "c1ccc2c(c1)cc[nH]2", "c1ccc2ncccc2c1", "c1ccc2cnccc2c1",
    "C1COCCN1", "C1CCNCC1", "C1CNCCN1", "C1CCOC1", "C1COCCO1", "C1CCCCC1",
    "C1C2CC3CC1CC(C2)C3", "C1=CC=CS1", "C1=CC=CO1",
    "Cc1c([N+](=O)[O-])cc([N+](=O)[O-])cc1[N+](=O)[O-]",
    "CCN(CC)C(=O)c1cccc(C)c1", "COc1cc(C=O)ccc1O", "C=CCc1ccc(O)c(OC)c1",
    "CC(C)C1CCC(C)CC1O", "CC1(C)C2CCC1(C)C(=O)C2", "CC(=C)C1CCC(C)=CC1",
    "CC(C)=CCCC(C)=CCO", "CC(C)=CCCC(C)=CC=O",
    "CC(=O)Oc1ccccc1C(=O)O", "CC(=O)Nc1ccc(O)cc1",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O", "COc1ccc2cc(ccc2c1)C(C)C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CN1CCCC1c1cccnc1",
    "CCOC(=O)c1ccc(N)cc1", "CCN(CC)CCOC(=O)c1ccc(N)cc1",
    "CCN(CC)CC(=O)Nc1c(C)cccc1C", "O=C1NC(=O)C(c2ccccc2)(c2ccccc2)N1",
    "CCC1(c2ccccc2)C(=O)NC(=O)NC1=O", "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21",
    "CC(C)(C)NCC(O)c1ccc(O)c(CO)c1", "CC(C)NCC(O)COc1ccc(CC(N)=O)cc1",
    "CC(C)NCC(O)COc1cccc2ccccc12", "COCCc1ccc(OCC(O)CNC(C)C)cc1",
    "CC(=O)CC(c1ccccc1)c1c(O)c2ccccc2oc1=O",
    "O=C(O)c1cn(C2CC2)c2cc(N3CCNCC3)c(F)cc2c1=O",
    "Nc1ccc(S(N)(=O)=O)cc1", "Cc1cc(NS(=O)(=O)c2ccc(N)cc2)no1",
    "COc1cc(Cc2cnc(N)nc2N)cc(OC)c1OC", "Cc1ncc([N+](=O)[O-])n1CCO",
    "NNC(=O)c1ccncc1", "NC(=O)c1cnccn1", "CCC(CO)NCCNC(CC)CO",
    "OCC(NC(=O)C(Cl)Cl)C(O)c1ccc([N+](=O)[O-])cc1",
    "CC1(C)SC2C(NC(=O)C(N)c3ccc(O)cc3)C(=O)N2C1C(=O)O",
    "CC1(C)SC2C(NC(=O)Cc3ccccc3)C(=O)N2C1C(=O)O",
    "CC1(C)SC2C(NC(=O)C(N)c3ccccc3)C(=O)N2C1C(=O)O",
    "CC1=C(C(=O)O)N2C(=O)C(NC(=O)C(N)c3ccccc3)C2SC1",
    "CNCCC(Oc1ccc(C(F)(F)F)cc1)c1ccccc1",
    "CNC1CCC(c2ccc(Cl)c(Cl)c2)c2ccccc21",
    "CN(C)CCCC1(c2ccc(F)cc2)OCc2cc(C#N)ccc21",
    "CN(C)CC(c1ccc(OC)cc1)C1(O)CCCCC1",
    "CC(NC(C)(C)C)C(=O)c1cccc(Cl)c1", "CN(C)CCC=C1c2ccccc2CCc2ccccc21",
    "CN(C)CCCN1c2ccccc2CCc2ccccc21",
    "OC1(c2ccc(Cl)cc2)CCN(CCCC(=O)c2ccc(F)cc2)CC1",
    "OCCOCCN1CCN(C2=Nc3ccccc3Sc3ccccc32)CC1",
    "CN(C)CC1CCCCC1(O)c1cccc(OC)c1", "NCC1(CC(=O)O)CCCCC1",
    "CC(C)CC(CN)CC(=O)O", "Nc1nnc(-c2cccc(Cl)c2Cl)c(N)n1",
    "NC(=O)N1c2ccccc2C=Cc2ccccc21", "NC(=O)N1c2ccccc2CC(=O)c2ccccc21",
    "CCC(N1CCCC1=O)C(N)=O", "CCCC(CCC)C(=O)O",
    "NCCCCC(NC(CCc1ccccc1)C(=O)O)C(=O)N1CCCC1C(=O)O",
    "CCOC(=O)C(CCc1ccccc1)NC(C)C(=O)N1CCCC1C(=O)O",
    "CC(CS)C(=O)N1CCCC1C(=O)O",
    "CCCCc1nc(Cl)c(CO)n1Cc1ccc(-c2ccccc2-c2nnn[nH]2)cc1",
    "CCCCC(=O)N(Cc1ccc(-c2ccccc2-c2nnn[nH]2)cc1)C(C(C)C)C(=O)O",
    "NS(=O)(=O)c1cc2c(cc1Cl)NCNS2(=O)=O",
    "NS(=O)(=O)c1cc(C(=O)O)c(NCc2ccco2)cc1Cl",
    "CCOC(=O)C1=C(COCCN)NC(C)=C(C(=O)OC)C1c1ccccc1Cl",
    "COC(=O)C1=C(C)NC(C)=C(C(=O)OC)C1c1ccccc1[N+](=O)[O-]",
    "CC(C)c1c(C(=O)Nc2ccccc2)c(-c2ccccc2)c(-c2ccc(F)cc2)n1CCC(O)CC(O)CC(=O)O",
    "CN(C)C(=N)NC(N)=N",
    "Cc1cnc(C(=O)NCCc2ccc(S(=O)(=O)NC(=O)NC3CCCCC3)cc2)cn1",
    "CCc1ccc(CCOc2ccc(CC3SC(=O)NC3=O)cc2)nc1",
    "NC(CC(=O)N1CCn2c(nnc2C(F)(F)F)C1)Cc1cc(F)c(F)cc1F",
    "COc1ccc2[nH]c(S(=O)Cc3ncc(C)c(OC)c3C)nc2c1",
    "CNC(=C[N+](=O)[O-])NCCSCc1ccc(CN(C)C)o1",
    "Cc1nc[nH]c1CSCCNC(=NC#N)NC",
    "CCOC(=O)N1CCC(=C2c3ccc(Cl)cc3CCc3cccnc32)CC1",
    "OC(=O)COCCN1CCN(C(c2ccccc2)c2ccc(Cl)cc2)CC1",
    "CN(C)CCOC(c1ccccc1)c1ccccc1", "CN(C)CCC(c1ccc(Cl)cc1)c1ccccn1",
    "CNS(=O)(=O)Cc1ccc2[nH]cc(CCN(C)C)c2c1",
    "Cc1ccc(-c2nc3ccc(C)cn3c2CC(=O)N(C)C)cc1",
    "COc1ccc2[nH]cc(CCNC(C)=O)c2c1", "NCCc1c[nH]c2ccc(O)cc21",
    "NCCc1ccc(O)c(O)c1", "CNCC(O)c1ccc(O)c(O)c1", "NCCc1c[nH]cn1",
    "OC(=O)c1cccnc1", "Cc1ncc(CO)c(CO)c1O",
    "Nc1nc2ncc(CNc3ccc(C(=O)NC(CCC(=O)O)C(=O)O)cc3)nc2c(=O)[nH]1",
    "OC(=O)CCCCC1SCC2NC(=O)NC21", "Nc1nc2c(ncn2COCCO)c(=O)[nH]1",
    "Cc1cn(C2CC(N=[N+]=[N-])C(CO)O2)c(=O)[nH]c1=O",
    "CCOC(=O)C1=CC(OC(CC)CC)C(NC(C)=O)C(N)C1",
    "CNC1(c2ccccc2Cl)CCCCC1=O", "CC(C)c1cccc(C(C)C)c1O",
    "CCC(=O)N(c1ccccc1)C1CCN(CCc2ccccc2)CC1",
    "CCC(=O)C(CC(C)N(C)C)(c1ccccc1)c1ccccc1",
    "Cc1ccc(-c2cc(C(F)(F)F)nn2-c2ccc(S(N)(=O)=O)cc2)cc1",
    "CS(=O)(=O)c1ccc(C2=C(c3ccccc3)C(=O)OC2)cc1",
    "OC(=O)Cc1ccccc1Nc1c(Cl)cccc1Cl",
    "COc1ccc2c(c1)c(CC(=O)O)c(C)n2C(=O)c1ccc(Cl)cc1",
    "CC(C(=O)O)c1cccc(C(=O)c2ccccc2)c1", "Cc1cccc(Nc2ccccc2C(=O)O)c1C",
    "O=c1[nH]cnc2[nH]ncc12", "Cn1c(=O)c2[nH]cnc2n(C)c1=O",
    "Cn1cnc2c1c(=O)[nH]c(=O)n2C",
    "CCCc1nn(C)c2c(=O)[nH]c(-c3cc(S(=O)(=O)N4CCN(C)CC4)ccc3OCC)nc12",
    "CCn1cc(C(=O)O)c(=O)c2cc(F)c(N3CCNCC3)cc21",
    "CCn1cc(C(=O)O)c(=O)c2ccc(C)nc21",
    "OCC(O)C1OC(=O)C(O)=C1O", "Fc1ccc(cc1)C(=O)CCCN1CCC(O)(CC1)c1ccc(Cl)cc1",
]

# Scaffolds carry one {R} slot; ring digits 1 and 2 stay on the scaffold
# side, substituents use 3 and up.
SCAFFOLDS = [
    "CC(=O)Nc1ccc({R})cc1",
    "O=C(O)c1ccc({R})cc1",
    "NS(=O)(=O)c1ccc({R})cc1",
    "O=C(Nc2ccccc2)c1ccc({R})cc1",
    "c1ccnc({R})c1",
    "O=C({R})N1CCCCC1",
    "O=C({R})N1CCOCC1",
    "OC(=O)C({R})Cc1ccccc1",
    "CC(C)NCC(O)COc1ccc({R})cc1",
]

CARBON_SCAFFOLDS = [  # slot sits on a ring nitrogen
    "CN1CCN({R})CC1",
]

SUBSTITUENTS = [
    "C", "CC", "CCC", "CCCC", "C(C)C", "C(C)(C)C", "C3CC3", "C3CCC3",
    "C3CCCC3", "C3CCCCC3", "F", "Cl", "Br", "I", "O", "OC", "OCC",
    "OC(C)C", "N", "NC", "N(C)C", "C#N", "C=C", "C=O", "C(=O)C", "C(=O)O",
    "C(=O)OC", "C(=O)N", "C(=O)NC", "C(F)(F)F", "OC(F)(F)F", "S(C)(=O)=O",
    "S(=O)(=O)N", "c3ccccc3", "c3ccncc3", "c3ccc(F)cc3", "c3ccc(Cl)cc3",
    "c3ccc(OC)cc3", "N3CCOCC3", "N3CCNCC3", "N3CCN(C)CC3",
]

PARA_FIRST = ["C", "F", "Cl", "OC"]


def main() -> None:
    lines = []
    seen = set()

    def add(prefix: str, idx: int, smiles: str) -> None:
        if smiles in seen:
            return
        seen.add(smiles)
        lines.append(f"{prefix}{idx:04d}\t{smiles}")

    for i, s in enumerate(CURATED, 1):
        add("d", i, s)

    n = 0
    for scaf in SCAFFOLDS:
        for sub in SUBSTITUENTS:
            n += 1
            add("g", n, scaf.replace("{R}", sub))
    for scaf in CARBON_SCAFFOLDS:
        for sub in SUBSTITUENTS:
            if sub[0] not in "CcS":
                continue
            n += 1
            add("g", n, scaf.replace("{R}", sub))

    m = 0
    for a in PARA_FIRST:
        for b in SUBSTITUENTS:
            m += 1
            add("p", m, f"c1cc({a})ccc1{b}")

    print("# generated by tools/make_corpus.py")
    for line in lines:
        print(line)


if __name__ == "__main__":
    main()
