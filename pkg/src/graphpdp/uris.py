"""URI constants for the policy language, request format and responses.

Everything the engine matches by URI lives here: XML namespaces, attribute
categories, condition/match function identifiers, combining algorithms and
status codes.
"""

# XML namespaces.  Elements are identified by (namespace, local name);
# prefixes in the document are irrelevant.
XACML3_NS = "urn:oasis:names:tc:xacml:3.0:core:schema:wd-17"
XACML4G_NS = "xacml4g:1.0"

# Attribute categories.
CAT_SUBJECT = "urn:oasis:names:tc:xacml:1.0:subject-category:access-subject"
CAT_RESOURCE = "urn:oasis:names:tc:xacml:3.0:attribute-category:resource"
CAT_ACTION = "urn:oasis:names:tc:xacml:3.0:attribute-category:action"
CAT_PATH_VERTEX = "xacml4g:1.0:path-category:vertex"
CAT_PATH_EDGE = "xacml4g:1.0:path-category:edge"

VERTEX_CATEGORIES = (CAT_SUBJECT, CAT_PATH_VERTEX, CAT_RESOURCE)
EDGE_CATEGORIES = (CAT_PATH_EDGE, CAT_RESOURCE)

# Common attribute ids seen in requests.
ATTR_ACTION_ID = "urn:oasis:names:tc:xacml:1.0:action:action-id"
ATTR_SUBJECT_ID = "urn:oasis:names:tc:xacml:1.0:subject:subject-id"
ATTR_RESOURCE_ID = "urn:oasis:names:tc:xacml:1.0:resource:resource-id"
ATTR_PATH_VERTEX_ID = "xacml4g:1.0:path:vertex-id"

# Condition functions usable in pattern conditions (Apply/@FunctionId).
FN_AND = "xacml4g:1.0:function:and"
FN_OR = "xacml4g:1.0:function:or"
FN_EQUAL = "xacml4g:1.0:function:equal"
FN_GREATER_THAN = "xacml4g:1.0:function:greater-than"
FN_GREATER_THAN_OR_EQUAL = "xacml4g:1.0:function:greater-than-or-equal"
FN_LESS_THAN = "xacml4g:1.0:function:less-than"
FN_LESS_THAN_OR_EQUAL = "xacml4g:1.0:function:less-than-or-equal"
FN_NOT_EQUAL = "xacml4g:1.0:function:not-equal"
FN_STRING_EQUAL_IGNORE_CASE = "xacml4g:1.0:function:string-equal-ignore-case"
FN_STRING_CONTAINS = "xacml4g:1.0:function:string-contains"
FN_STRING_STARTS_WITH = "xacml4g:1.0:function:string-starts-with"

CONDITION_FUNCTIONS = (
    FN_AND,
    FN_OR,
    FN_EQUAL,
    FN_GREATER_THAN,
    FN_GREATER_THAN_OR_EQUAL,
    FN_LESS_THAN,
    FN_LESS_THAN_OR_EQUAL,
    FN_NOT_EQUAL,
    FN_STRING_EQUAL_IGNORE_CASE,
    FN_STRING_CONTAINS,
    FN_STRING_STARTS_WITH,
)

# Match functions usable in targets and pattern element constraints
# (Match/@MatchId).  Deliberately a small core-XACML subset.
MATCH_STRING_EQUAL = "urn:oasis:names:tc:xacml:1.0:function:string-equal"
MATCH_STRING_EQUAL_IGNORE_CASE = (
    "urn:oasis:names:tc:xacml:3.0:function:string-equal-ignore-case"
)

MATCH_FUNCTIONS = (MATCH_STRING_EQUAL, MATCH_STRING_EQUAL_IGNORE_CASE)

# Rule combining algorithms.
ALG_FIRST_APPLICABLE = (
    "urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:first-applicable"
)
ALG_DENY_OVERRIDES = (
    "urn:oasis:names:tc:xacml:3.0:rule-combining-algorithm:deny-overrides"
)
ALG_DENY_OVERRIDES_LEGACY = (
    "urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:deny-overrides"
)
ALG_PERMIT_OVERRIDES = (
    "urn:oasis:names:tc:xacml:3.0:rule-combining-algorithm:permit-overrides"
)
ALG_PERMIT_OVERRIDES_LEGACY = (
    "urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:permit-overrides"
)

COMBINING_ALGORITHMS = (
    ALG_FIRST_APPLICABLE,
    ALG_DENY_OVERRIDES,
    ALG_DENY_OVERRIDES_LEGACY,
    ALG_PERMIT_OVERRIDES,
    ALG_PERMIT_OVERRIDES_LEGACY,
)

DENY_OVERRIDES_ALGS = (ALG_DENY_OVERRIDES, ALG_DENY_OVERRIDES_LEGACY)
PERMIT_OVERRIDES_ALGS = (ALG_PERMIT_OVERRIDES, ALG_PERMIT_OVERRIDES_LEGACY)

# Response status codes.
STATUS_OK = "urn:oasis:names:tc:xacml:1.0:status:ok"
STATUS_PROCESSING_ERROR = "urn:oasis:names:tc:xacml:1.0:status:processing-error"
