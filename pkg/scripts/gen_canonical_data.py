"""One-off generator for the packaged USEEIO summary taxonomy files.

Kept in the repo so the canonical CSVs can be regenerated/extended in one
place instead of hand-editing quoted CSV.
"""

import csv
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "greenledger" / "data"

# (code, title, [naics codes], factor kg CO2e per USD with margins)
CLASSES = [
    ("111CA", "Farms", ["111", "112"], 1.85),
    ("113FF", "Forestry, fishing, and related activities", ["113", "114", "115"], 0.785),
    ("211", "Oil and gas extraction", ["211"], 1.25),
    ("212", "Mining, except oil and gas", ["212"], 1.08),
    ("213", "Support activities for mining", ["213"], 0.52),
    ("22", "Utilities", ["221"], 2.97),
    ("23", "Construction", ["236", "237", "238"], 0.395),
    ("321", "Wood products", ["321"], 0.486),
    ("327", "Nonmetallic mineral products", ["327"], 1.13),
    ("331", "Primary metals", ["331"], 1.39),
    ("332", "Fabricated metal products", ["332"], 0.455),
    ("333", "Machinery", ["333"], 0.371),
    ("334", "Computer and electronic products", ["334"], 0.21),
    ("335", "Electrical equipment, appliances, and components", ["335"], 0.405),
    ("3361MV", "Motor vehicles, bodies and trailers, and parts", ["3361", "3362", "3363"], 0.433),
    ("3364OT", "Other transportation equipment", ["3364", "3365", "3366", "3369"], 0.281),
    ("337", "Furniture and related products", ["337"], 0.358),
    ("339", "Miscellaneous manufacturing", ["339"], 0.262),
    ("311FT", "Food and beverage and tobacco products", ["311", "312"], 0.872),
    ("313TT", "Textile mills and textile product mills", ["313", "314"], 0.72),
    ("315AL", "Apparel and leather and allied products", ["315", "316"], 0.53),
    ("322", "Paper products", ["322"], 0.742),
    ("323", "Printing and related support activities", ["323"], 0.452),
    ("324", "Petroleum and coal products", ["324"], 1.74),
    ("325", "Chemical products", ["325"], 0.92),
    ("326", "Plastics and rubber products", ["326"], 0.647),
    ("42", "Wholesale trade", ["423", "424", "425"], 0.141),
    ("441", "Motor vehicle and parts dealers", ["441"], 0.16),
    ("445", "Food and beverage stores", ["445"], 0.197),
    ("452", "General merchandise stores", ["452"], 0.183),
    (
        "4A0",
        "Other retail",
        ["442", "443", "444", "446", "447", "448", "451", "453", "454"],
        0.173,
    ),
    ("481", "Air transportation", ["481"], 1.04),
    ("482", "Rail transportation", ["482"], 0.564),
    ("483", "Water transportation", ["483"], 1.21),
    ("484", "Truck transportation", ["484"], 0.855),
    ("485", "Transit and ground passenger transportation", ["485"], 0.655),
    ("486", "Pipeline transportation", ["486"], 1.52),
    ("487OS", "Other transportation and support activities", ["487", "488", "492"], 0.38),
    ("493", "Warehousing and storage", ["493"], 0.346),
    ("511", "Publishing industries, except internet (includes software)", ["511"], 0.139),
    ("512", "Motion picture and sound recording industries", ["512"], 0.178),
    ("513", "Broadcasting and telecommunications", ["515", "517"], 0.162),
    (
        "514",
        "Data processing, internet publishing, and other information services",
        ["518", "519"],
        0.172,
    ),
    (
        "521CI",
        "Federal Reserve banks, credit intermediation, and related activities",
        ["521", "522"],
        0.0995,
    ),
    ("523", "Securities, commodity contracts, and investments", ["523"], 0.0704),
    ("524", "Insurance carriers and related activities", ["524"], 0.0829),
    ("525", "Funds, trusts, and other financial vehicles", ["525"], 0.0533),
    ("HS", "Housing", ["5311"], 0.082),
    ("ORE", "Other real estate", ["5312", "5313"], 0.118),
    (
        "532RL",
        "Rental and leasing services and lessors of intangible assets",
        ["532", "533"],
        0.222,
    ),
    ("5411", "Legal services", ["5411"], 0.0755),
    ("5415", "Computer systems design and related services", ["5415"], 0.0863),
    (
        "5412OP",
        "Miscellaneous professional, scientific, and technical services",
        ["5412", "5413", "5414", "5416", "5417", "5418", "5419"],
        0.106,
    ),
    ("55", "Management of companies and enterprises", ["551"], 0.134),
    ("561", "Administrative and support services", ["561"], 0.192),
    ("562", "Waste management and remediation services", ["562"], 2.04),
    ("61", "Educational services", ["611"], 0.145),
    ("621", "Ambulatory health care services", ["621"], 0.156),
    ("622", "Hospitals", ["622"], 0.231),
    ("623", "Nursing and residential care facilities", ["623"], 0.204),
    ("624", "Social assistance", ["624"], 0.19),
    (
        "711AS",
        "Performing arts, spectator sports, museums, and related activities",
        ["711", "712"],
        0.196,
    ),
    ("713", "Amusements, gambling, and recreation industries", ["713"], 0.249),
    ("721", "Accommodation", ["721"], 0.282),
    ("722", "Food services and drinking places", ["722"], 0.331),
    ("81", "Other services, except government", ["811", "812", "813", "814"], 0.223),
]

NAICS = {
    "111": "Crop Production",
    "112": "Animal Production and Aquaculture",
    "113": "Forestry and Logging",
    "114": "Fishing, Hunting and Trapping",
    "115": "Support Activities for Agriculture and Forestry",
    "211": "Oil and Gas Extraction",
    "212": "Mining (except Oil and Gas)",
    "213": "Support Activities for Mining",
    "221": "Utilities",
    "236": "Construction of Buildings",
    "237": "Heavy and Civil Engineering Construction",
    "238": "Specialty Trade Contractors",
    "311": "Food Manufacturing",
    "312": "Beverage and Tobacco Product Manufacturing",
    "313": "Textile Mills",
    "314": "Textile Product Mills",
    "315": "Apparel Manufacturing",
    "316": "Leather and Allied Product Manufacturing",
    "321": "Wood Product Manufacturing",
    "322": "Paper Manufacturing",
    "323": "Printing and Related Support Activities",
    "324": "Petroleum and Coal Products Manufacturing",
    "325": "Chemical Manufacturing",
    "326": "Plastics and Rubber Products Manufacturing",
    "327": "Nonmetallic Mineral Product Manufacturing",
    "331": "Primary Metal Manufacturing",
    "332": "Fabricated Metal Product Manufacturing",
    "333": "Machinery Manufacturing",
    "334": "Computer and Electronic Product Manufacturing",
    "335": "Electrical Equipment, Appliance, and Component Manufacturing",
    "3361": "Motor Vehicle Manufacturing",
    "3362": "Motor Vehicle Body and Trailer Manufacturing",
    "3363": "Motor Vehicle Parts Manufacturing",
    "3364": "Aerospace Product and Parts Manufacturing",
    "3365": "Railroad Rolling Stock Manufacturing",
    "3366": "Ship and Boat Building",
    "3369": "Other Transportation Equipment Manufacturing",
    "337": "Furniture and Related Product Manufacturing",
    "339": "Miscellaneous Manufacturing",
    "423": "Merchant Wholesalers, Durable Goods",
    "424": "Merchant Wholesalers, Nondurable Goods",
    "425": "Wholesale Electronic Markets and Agents and Brokers",
    "441": "Motor Vehicle and Parts Dealers",
    "442": "Furniture and Home Furnishings Stores",
    "443": "Electronics and Appliance Stores",
    "444": "Building Material and Garden Equipment and Supplies Dealers",
    "445": "Food and Beverage Stores",
    "446": "Health and Personal Care Stores",
    "447": "Gasoline Stations",
    "448": "Clothing and Clothing Accessories Stores",
    "451": "Sporting Goods, Hobby, Musical Instrument, and Book Stores",
    "452": "General Merchandise Stores",
    "453": "Miscellaneous Store Retailers",
    "454": "Nonstore Retailers",
    "481": "Air Transportation",
    "482": "Rail Transportation",
    "483": "Water Transportation",
    "484": "Truck Transportation",
    "485": "Transit and Ground Passenger Transportation",
    "486": "Pipeline Transportation",
    "487": "Scenic and Sightseeing Transportation",
    "488": "Support Activities for Transportation",
    "492": "Couriers and Messengers",
    "493": "Warehousing and Storage",
    "511": "Publishing Industries (except Internet)",
    "512": "Motion Picture and Sound Recording Industries",
    "515": "Broadcasting (except Internet)",
    "517": "Telecommunications",
    "518": "Data Processing, Hosting, and Related Services",
    "519": "Other Information Services",
    "521": "Monetary Authorities-Central Bank",
    "522": "Credit Intermediation and Related Activities",
    "523": "Securities, Commodity Contracts, and Other Financial Investments and Related Activities",
    "524": "Insurance Carriers and Related Activities",
    "525": "Funds, Trusts, and Other Financial Vehicles",
    "5311": "Lessors of Real Estate",
    "5312": "Offices of Real Estate Agents and Brokers",
    "5313": "Activities Related to Real Estate",
    "532": "Rental and Leasing Services",
    "533": "Lessors of Nonfinancial Intangible Assets (except Copyrighted Works)",
    "5411": "Legal Services",
    "5412": "Accounting, Tax Preparation, Bookkeeping, and Payroll Services",
    "5413": "Architectural, Engineering, and Related Services",
    "5414": "Specialized Design Services",
    "5415": "Computer Systems Design and Related Services",
    "5416": "Management, Scientific, and Technical Consulting Services",
    "5417": "Scientific Research and Development Services",
    "5418": "Advertising, Public Relations, and Related Services",
    "5419": "Other Professional, Scientific, and Technical Services",
    "551": "Management of Companies and Enterprises",
    "561": "Administrative and Support Services",
    "562": "Waste Management and Remediation Services",
    "611": "Educational Services",
    "621": "Ambulatory Health Care Services",
    "622": "Hospitals",
    "623": "Nursing and Residential Care Facilities",
    "624": "Social Assistance",
    "711": "Performing Arts, Spectator Sports, and Related Industries",
    "712": "Museums, Historical Sites, and Similar Institutions",
    "713": "Amusement, Gambling, and Recreation Industries",
    "721": "Accommodation",
    "722": "Food Services and Drinking Places",
    "811": "Repair and Maintenance",
    "812": "Personal and Laundry Services",
    "813": "Religious, Grantmaking, Civic, Professional, and Similar Organizations",
    "814": "Private Households",
}


def main() -> None:
    assert len(CLASSES) == 66, f"expected 66 classes, got {len(CLASSES)}"
    codes = [c[0] for c in CLASSES]
    assert len(set(codes)) == 66, "duplicate class codes"
    referenced = {n for _, _, naics, _ in CLASSES for n in naics}
    missing = referenced - set(NAICS)
    assert not missing, f"NAICS descriptions missing for {sorted(missing)}"

    DATA.mkdir(parents=True, exist_ok=True)

    with open(DATA / "useeio_summary_classes.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["code", "title", "naics_codes", "description"])
        for code, title, naics, _ in CLASSES:
            w.writerow([code, title, "|".join(naics), ""])

    with open(DATA / "useeio_summary_factors.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["code", "factor_kg_per_unit", "currency_basis", "factor_kind"])
        for code, _, _, factor in CLASSES:
            w.writerow([code, repr(factor), "USD2021", "with_margins"])

    with open(DATA / "naics_descriptions.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["naics_code", "description"])
        for code in sorted(NAICS):
            w.writerow([code, NAICS[code]])

    print(f"wrote {len(CLASSES)} classes, {len(NAICS)} NAICS rows to {DATA}")


if __name__ == "__main__":
    main()
