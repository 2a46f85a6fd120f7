"""Keyword tables behind the deterministic mock backend.

The synthetic data generator draws its cargo and owner texts from the same
tables, which is what makes generated records and mock results line up.
"""

from __future__ import annotations

import re

# Specific cargo keyword -> HS subheading. Several keywords may share a code.
CI_KEYWORDS: dict[str, str] = {
    "BEEF": "020230", "PORK": "020329", "CHICKEN": "020714", "SALMON": "030313",
    "SHRIMP": "030617", "SQUID": "030743", "MILK": "040120", "CHEESE": "040690",
    "BUTTER": "040510", "WHEY": "040410", "BANANA": "080390", "BANANAS": "080390",
    "ORANGES": "080510", "GRAPES": "080610", "APPLES": "080810", "COFFEE": "090111",
    "TEA": "090240", "PEPPER": "090411", "WHEAT": "100199", "CORN": "100590",
    "RICE": "100630", "FLOUR": "110100", "MALT": "110710", "STARCH": "110812",
    "OLIVE": "150990", "PALM": "151190", "SUGAR": "170199", "TOMATO": "200290",
    "JAM": "200799", "JUICE": "200990", "CONCENTRATE": "200990", "CONC": "200990",
    "VEGETABLE": "200990", "POMEGRANATE": "200989", "APPLE": "200979",
    "BEER": "220300", "WINE": "220421", "WHISKY": "220830", "FEED": "230990",
    "SOYMEAL": "230400", "CIGARETTES": "240220", "LUBRICANT": "271019",
    "METHANOL": "290511", "ACRYLIC": "291611", "VACCINE": "300241",
    "MEDICAMENTS": "300490", "FLAVOUR": "330210", "PERFUME": "330300",
    "COSMETICS": "330499", "TOOTHPASTE": "330610", "POLYETHYLENE": "390110",
    "PVC": "390410", "RESIN": "390760", "RUBBER": "400122", "TYRES": "401110",
    "LUMBER": "440710", "PLYWOOD": "441231", "PAPER": "480255", "KRAFTLINER": "480431",
    "COTTON": "520100", "JERSEYS": "611030", "SOCKS": "611595", "TROUSERS": "620342",
    "SHIRTS": "620520", "SHOES": "640399", "SNEAKERS": "640411", "GRANITE": "680293",
    "MARBLE": "680291", "TILES": "690721", "GLASSWARE": "701349", "BILLETS": "720720",
    "COILS": "720839", "GALVANIZED": "721049", "BOLTS": "731815", "ALUMINIUM": "760612",
    "PUMPS": "841370", "COMPRESSORS": "841480", "LAPTOPS": "847130", "BEARINGS": "848210",
    "GEARS": "848340", "BATTERIES": "850760", "SMARTPHONES": "851712",
    "TELEVISIONS": "852872", "CABLES": "854449", "SEDAN": "870323", "CABS": "870710",
    "BRAKE": "870830", "MOTORCYCLES": "871120", "ENDOSCOPES": "901890", "SOFA": "940161",
    "FURNITURE": "940360", "MATTRESS": "940429", "TOYS": "950300",
}

# Broad terms that pin down a chapter and heading but not a subheading.
CI_GENERIC: dict[str, tuple[str, str]] = {
    "TUBE": ("73", "7306"), "TUBES": ("73", "7306"), "PIPE": ("73", "7306"),
    "GARMENTS": ("62", "6211"), "APPAREL": ("62", "6211"),
    "STERILE": ("30", "3005"), "PARTS": ("84", "8487"), "SPARES": ("84", "8487"),
    "CHEMICALS": ("38", "3824"), "FOODSTUFF": ("21", "2106"), "FOODSTUFFS": ("21", "2106"),
    "MACHINERY": ("84", "8479"), "EQUIPMENT": ("84", "8479"),
}

# Normalised owner name -> (section, division, group, size).
OI_NAMES: dict[str, tuple[str, str, str, str]] = {
    "HANBIT FOODS": ("C", "10", "107", "Large"),
    "DAEBAK DAIRY": ("C", "10", "105", "Mid"),
    "SEORAE FEED": ("C", "10", "108", "Mid"),
    "GANGNAM CATERING": ("I", "56", "561", "Large"),
    "NURI RESTAURANT GROUP": ("I", "56", "561", "Mid"),
    "BADA FISHERIES": ("A", "03", "031", "SME"),
    "HWANGTO FARMS": ("A", "01", "011", "SME"),
    "SAMIL STEEL": ("C", "24", "241", "Large"),
    "DONGBANG METAL WORKS": ("C", "25", "259", "SME"),
    "HANKOOK MOTOR PARTS": ("C", "30", "303", "Mid"),
    "SEJONG AUTOMOTIVE": ("C", "30", "301", "Large"),
    "MIRAE ELECTRONICS": ("C", "26", "264", "Large"),
    "BORAM SEMICON": ("C", "26", "261", "Large"),
    "JINJU COSMETICS": ("C", "20", "204", "Mid"),
    "CHEONJI CHEMICAL": ("C", "20", "201", "Large"),
    "GOYANG PHARM": ("C", "21", "212", "Mid"),
    "SARANG APPAREL": ("C", "14", "141", "SME"),
    "PUREUN TEXTILE": ("C", "13", "132", "SME"),
    "NAMU FURNITURE": ("C", "32", "320", "SME"),
    "HANA TOBACCO": ("C", "12", "120", "Large"),
    "GEUMGANG BEVERAGE": ("C", "11", "112", "Mid"),
    "BITGOEUL BREWERY": ("C", "11", "111", "Mid"),
    "DAEHAN TRADING": ("G", "46", "463", "Mid"),
    "SEOUL MART": ("G", "47", "471", "Large"),
    "HANGANG WHOLESALE": ("G", "46", "464", "SME"),
    "JEIL MACHINERY TRADING": ("G", "46", "465", "SME"),
    "BUSAN LOGISTICS": ("H", "52", "529", "Mid"),
    "ONDO COLD STORAGE": ("H", "52", "521", "SME"),
    "HAEUN SHIPPING": ("H", "50", "501", "Large"),
    "GYEONGNAM CONSTRUCTION": ("F", "41", "411", "Large"),
    "MAEUM PAPER": ("C", "17", "171", "Mid"),
    "TAEYANG TIRE": ("C", "22", "221", "Large"),
    "SUNGWON PLASTICS": ("C", "22", "222", "SME"),
    "CHEONGJU CERAMICS": ("C", "23", "232", "SME"),
    "HANSOL MEDICAL": ("C", "27", "271", "Mid"),
    "DASAN TOYS": ("C", "33", "334", "SME"),
}

# Industry words that identify a section and division only.
OI_GENERIC: dict[str, tuple[str, str]] = {
    "TRADING": ("G", "46"), "WHOLESALE": ("G", "46"), "LOGISTICS": ("H", "52"),
    "SHIPPING": ("H", "50"), "FOODS": ("C", "10"), "ELECTRONICS": ("C", "26"),
    "STEEL": ("C", "24"), "TEXTILE": ("C", "13"), "CHEMICAL": ("C", "20"),
    "MOTORS": ("C", "30"),
}

LEGAL_SUFFIXES = frozenset({"CO", "LTD", "INC", "CORP", "CORPORATION", "COMPANY", "LIMITED", "LLC", "PLC"})

_TOKEN = re.compile(r"[A-Za-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Split on whitespace and punctuation, keeping the original case."""
    return _TOKEN.findall(text)


def normalize_owner(text: str) -> str:
    toks = [t.upper() for t in tokenize(text)]
    while toks and toks[-1] in LEGAL_SUFFIXES:
        toks.pop()
    return " ".join(toks)


def keywords_for(hs6: str) -> list[str]:
    return [k for k, v in CI_KEYWORDS.items() if v == hs6]
