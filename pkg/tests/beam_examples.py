"""Beam predictions of three base parsers for two questions over the toy databases."""

HEAD_QUESTION = "How many heads of the departments are older than 56?"
HEAD_GOLD = "SELECT COUNT(*) FROM head WHERE head.age > 56"
HEAD_BEAMS = {
    "SmBoP": [
        "SELECT COUNT(*) FROM head WHERE head.age > 56 ",
        "SELECT head.name FROM head WHERE head.age > 56 ",
        "SELECT MAX(head.age) FROM head WHERE head.age > 56 ",
        "SELECT head.age FROM head WHERE head.age > 56 ",
        "SELECT * FROM head WHERE head.age > 56 ",
    ],
    "RESDSQL": [
        "SELECT COUNT(*) FROM head WHERE head.age > 56 ",
        "SELECT COUNT(DISTINCT head.name) FROM head WHERE head.age > 56 ",
        "SELECT COUNT(head.head_id) FROM head WHERE head.age > 56 ",
        "SELECT COUNT(*) , department.name FROM management JOIN head ON management.head_ID = head.head_ID JOIN department ON management.department_ID = department.Department_ID WHERE  head.age > 56 GROUP BY department.name",
        "SELECT ( DISTINCT department.department_id) from management JOIN head ON management.head_ID = head.head_ID JOIN department ON management.department_ID = department.Department_ID where  head.age > 56",
    ],
    "NatSQL": [
        "SELECT COUNT(*) FROM head WHERE head.age > 56 ",
        "SELECT COUNT(*) FROM department WHERE department.department_id in (SELECT management.department_ID FROM management, head WHERE head.age = 56) ",
        "SELECT COUNT(*) FROM head WHERE head.age = 56 ",
        "SELECT COUNT(*) FROM head WHERE head.age < 56 ",
        "SELECT COUNT(*) FROM head WHERE head.age >= 56 ",
    ],
}

FESTIVAL_QUESTION = "Show the names of the three most recent festivals."
FESTIVAL_GOLD = "SELECT festival_detail.festival_name FROM festival_detail ORDER BY festival_detail.year DESC LIMIT 3"
FESTIVAL_BEAMS = {
    "SmBoP": [
        "SELECT festival_detail.festival_name FROM festival_detail ORDER BY festival_detail.year DESC LIMIT 3 ",
        "SELECT festival_detail.festival_name FROM festival_detail WHERE festival_detail.year = (SELECT MAX( festival_detail.year ) FROM festival_detail) ",
        "SELECT 3 FROM festival_detail WHERE festival_detail.year = (SELECT MAX( festival_detail.year ) FROM festival_detail)",
        "SELECT MAX( festival_detail.year ) FROM festival_detail ORDER BY festival_detail.year DESC LIMIT 3 ",
        "SELECT MAX( festival_detail.year ) FROM festival_detail ORDER BY festival_detail.year DESC ",
    ],
    "RESDSQL": [
        "SELECT festival_detail.festival_name FROM festival_detail ORDER BY festival_detail.year DESC LIMIT 3",
        "SELECT festival_detail.festival_name FROM festival_detail ORDER BY festival_detail.year ASC LIMIT 3",
        "SELECT DISTINCT festival_detail.festival_name FROM festival_detail ORDER BY festival_detail.year DESC LIMIT 3",
    ],
    "NatSQL": [
        "SELECT festival_detail.festival_name FROM festival_detail  ORDER BY festival_detail.year DESC LIMIT 3 ",
        "SELECT festival_detail.festival_name FROM festival_detail ORDER BY festival_detail.year ASC LIMIT 3  ",
        "SELECT festival_detail.festival_name , festival_detail.year FROM festival_detail ORDER BY festival_detail.year DESC LIMIT 3  ",
        "SELECT festival_detail.festival_name FROM festival_detail  ",
        "SELECT festival_detail.festival_name FROM festival_detail GROUP BY festival_detail.festival_name  ORDER BY festival_detail.year DESC LIMIT 3 ",
    ],
}

# the one beam entry that is not valid SQL: DISTINCT inside a bare parenthesis
UNGRAMMATICAL = HEAD_BEAMS["RESDSQL"][4]


def all_strings() -> list[str]:
    out = [HEAD_GOLD, FESTIVAL_GOLD]
    for beams in (HEAD_BEAMS, FESTIVAL_BEAMS):
        for preds in beams.values():
            out.extend(preds)
    return out


def distinct_strings() -> list[str]:
    seen = {}
    for s in all_strings():
        seen.setdefault(" ".join(s.split()), s)
    return list(seen.values())
