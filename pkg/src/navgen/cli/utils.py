from typing import Any, Dict, Type

from navgen.trainers.common import NavGenParams, load_config_file


def common_args():
    return [
        {
            "arg": "--config",
            "help": "navgen-config/1 JSON file; explicit flags override its values",
            "required": False,
            "type": str,
        },
    ]


def python_type_from_schema_field(field_data: dict) -> Type:
    type_map = {
        "string": str,
        "number": float,
        "integer": int,
        "boolean": bool,
    }
    field_type = field_data.get("type")
    if field_type == "array":
        return type_map.get(field_data.get("items", {}).get("type"), str)
    if field_type:
        return type_map.get(field_type, str)
    elif "anyOf" in field_data:
        for type_option in field_data["anyOf"]:
            if type_option.get("type") != "null":
                return type_map.get(type_option.get("type"), str)
    return str


def get_choices(field_data: dict):
    if "enum" in field_data:
        return field_data["enum"]
    for option in field_data.get("anyOf", []):
        if "enum" in option:
            return option["enum"]
    return None


def get_field_info(params_class: Type[NavGenParams]):
    """One argparse definition per flat params field; nested models are only settable through --config."""
    schema = params_class.model_json_schema()
    properties = schema.get("properties", {})
    field_info = []
    for field_name, field_data in properties.items():
        if "$ref" in field_data or field_data.get("type") == "object":
            continue
        temp_info = {
            "arg": f"--{field_name.replace('_', '-')}",
            "alias": [f"--{field_name}"] if "_" in field_name else [],
            "type": python_type_from_schema_field(field_data),
            "help": field_data.get("title", ""),
            "choices": get_choices(field_data),
        }
        if temp_info["type"] == bool:
            temp_info["action"] = "store_true"
        if field_data.get("type") == "array":
            temp_info["nargs"] = "+"
        field_info.append(temp_info)
    return field_info


def register_params_parser(parser, name: str, description: str, params_class: Type[NavGenParams], factory):
    subparser = parser.add_parser(name, description=description)
    for arg in common_args() + get_field_info(params_class):
        names = [arg["arg"]] + arg.get("alias", [])
        dest = arg["arg"].replace("--", "").replace("-", "_")
        if "action" in arg:
            subparser.add_argument(*names, dest=dest, help=arg["help"], action=arg["action"], default=None)
        else:
            subparser.add_argument(
                *names,
                dest=dest,
                help=arg["help"],
                required=arg.get("required", False),
                type=arg.get("type"),
                default=None,
                choices=arg.get("choices"),
                nargs=arg.get("nargs"),
            )
    subparser.set_defaults(func=factory)
    return subparser


def collect_params(args, params_class: Type[NavGenParams]) -> NavGenParams:
    values: Dict[str, Any] = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in params_class.model_fields:
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    return params_class(**values)
