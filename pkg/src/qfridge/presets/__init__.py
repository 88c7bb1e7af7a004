# package data: named .ini configurations
